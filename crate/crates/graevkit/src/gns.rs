//! Positive definite functions on finite abelian groups: Gram matrices,
//! spectral PSD checks, the standard exponential kernels, and the explicit
//! construction of the cyclic unitary representation a positive definite
//! function generates.
//!
//! This module works in double precision. The quotient of the finite
//! function space by the null space of the induced sesquilinear form is
//! computed spectrally: eigenvalues below `tol · max eigenvalue` count as
//! null, and the kept eigenpairs give an orthonormal basis of the quotient.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Relative tolerance for the conjugate-symmetry invariant of a positive
/// definite function.
const SYMMETRY_TOL: f64 = 1e-9;

/// A finite abelian group presented as a direct product of cyclic factors.
/// Elements are mixed-radix indices: element `e` has digits
/// `e = d_0 + d_1 n_0 + d_2 n_0 n_1 + …` with `d_i < n_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    pub cyclic_factors: Vec<usize>,
}

impl FiniteAbelianGroup {
    pub fn new(cyclic_factors: Vec<usize>) -> Result<Self> {
        if cyclic_factors.is_empty() || cyclic_factors.contains(&0) {
            return Err(Error::BadParameter(
                "cyclic factors must be positive".into(),
            ));
        }
        Ok(Self { cyclic_factors })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn order(&self) -> usize {
        self.cyclic_factors.iter().product()
    }

    pub fn identity(&self) -> usize {
        0
    }

    fn digits(&self, mut e: usize) -> Vec<usize> {
        self.cyclic_factors
            .iter()
            .map(|&n| {
                let d = e % n;
                e /= n;
                d
            })
            .collect()
    }

    fn index_of_digits(&self, digits: &[usize]) -> usize {
        let mut e = 0;
        let mut stride = 1;
        for (&d, &n) in digits.iter().zip(&self.cyclic_factors) {
            e += d * stride;
            stride *= n;
        }
        e
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let da = self.digits(a);
        let db = self.digits(b);
        let sum: Vec<usize> = da
            .iter()
            .zip(&db)
            .zip(&self.cyclic_factors)
            .map(|((&x, &y), &n)| (x + y) % n)
            .collect();
        self.index_of_digits(&sum)
    }

    pub fn neg(&self, a: usize) -> usize {
        let da = self.digits(a);
        let neg: Vec<usize> = da
            .iter()
            .zip(&self.cyclic_factors)
            .map(|(&x, &n)| (n - x) % n)
            .collect();
        self.index_of_digits(&neg)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Value of the character indexed by `t` at group element `g`:
    /// `exp(2πi Σ t_d g_d / n_d)`.
    pub fn character_value(&self, t: usize, g: usize) -> Complex64 {
        let dt = self.digits(t);
        let dg = self.digits(g);
        let mut phase = 0.0;
        for ((&td, &gd), &n) in dt.iter().zip(&dg).zip(&self.cyclic_factors) {
            phase += (td * gd) as f64 / n as f64;
        }
        Complex64::from_polar(1.0, TAU * phase)
    }
}

/// A complex-valued function on a finite abelian group, one value per
/// element index.
#[derive(Debug, Clone, PartialEq)]
pub struct PdFunction {
    values: Vec<Complex64>,
}

impl PdFunction {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::InvalidPdFunction(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(Self { values })
    }

    /// The indicator of the identity.
    pub fn delta(group: &FiniteAbelianGroup) -> Self {
        let mut values = vec![Complex64::ZERO; group.order()];
        values[group.identity()] = Complex64::ONE;
        Self { values }
    }

    /// Nonnegative mixture of characters: `f(g) = Σ_t w_t χ_t(g)`. This is
    /// the general positive definite function on a finite abelian group.
    pub fn from_character_weights(group: &FiniteAbelianGroup, weights: &[f64]) -> Result<Self> {
        if weights.len() != group.order() {
            return Err(Error::InvalidPdFunction(format!(
                "{} weights for a group of order {}",
                weights.len(),
                group.order()
            )));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidPdFunction(
                "character weights must be finite and nonnegative".into(),
            ));
        }
        let n = group.order();
        let values = (0..n)
            .map(|g| {
                (0..n)
                    .map(|t| group.character_value(t, g).scale(weights[t]))
                    .sum()
            })
            .collect();
        Ok(Self { values })
    }

    pub fn value(&self, g: usize) -> Complex64 {
        self.values[g]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Pointwise sum.
    pub fn add(&self, other: &PdFunction) -> Result<PdFunction> {
        if self.values.len() != other.values.len() {
            return Err(Error::InvalidPdFunction("length mismatch".into()));
        }
        Ok(PdFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &PdFunction) -> Result<PdFunction> {
        if self.values.len() != other.values.len() {
            return Err(Error::InvalidPdFunction("length mismatch".into()));
        }
        Ok(PdFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    fn scale_bound(&self) -> f64 {
        1.0 + self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_conjugate_symmetry(&self, group: &FiniteAbelianGroup) -> Result<()> {
        let bound = SYMMETRY_TOL * self.scale_bound();
        for g in 0..group.order() {
            let gap = (self.values[group.neg(g)] - self.values[g].conj()).norm();
            if gap > bound {
                return Err(Error::InvalidPdFunction(format!(
                    "f(-g) differs from conj f(g) at element {g} by {gap:e}"
                )));
            }
        }
        Ok(())
    }
}

/// PD function values keyed by element index, as stored on disk:
/// `{"0": [1.0, 0.0], "1": [0.5, -0.5], …}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawPdFunction(pub BTreeMap<String, [f64; 2]>);

impl RawPdFunction {
    pub fn resolve(&self, group: &FiniteAbelianGroup) -> Result<PdFunction> {
        let n = group.order();
        let mut values = vec![None; n];
        for (key, [re, im]) in &self.0 {
            let idx: usize = key
                .parse()
                .map_err(|_| Error::InvalidPdFunction(format!("bad element index `{key}`")))?;
            if idx >= n {
                return Err(Error::InvalidPdFunction(format!(
                    "element index {idx} out of range for order {n}"
                )));
            }
            values[idx] = Some(Complex64::new(*re, *im));
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::InvalidPdFunction(format!("missing value for element {i}"))))
            .collect::<Result<Vec<_>>>()?;
        PdFunction::new(group, values)
    }

    pub fn from_function(f: &PdFunction) -> Self {
        RawPdFunction(
            f.values
                .iter()
                .enumerate()
                .map(|(i, z)| (i.to_string(), [z.re, z.im]))
                .collect(),
        )
    }
}

/// Gram matrix of `f` over the listed elements, with the fixed convention
/// `M[i][j] = f(g_j⁻¹ · g_i)`; positive definiteness of `f` is equivalent
/// to positive semidefiniteness of this matrix. Errors when the conjugate
/// symmetry `f(g⁻¹) = conj f(g)` fails (the matrix would not be Hermitian).
pub fn gram_matrix(
    group: &FiniteAbelianGroup,
    f: &PdFunction,
    elements: &[usize],
) -> Result<DMatrix<Complex64>> {
    if f.values().len() != group.order() {
        return Err(Error::InvalidPdFunction("value table size mismatch".into()));
    }
    if let Some(&bad) = elements.iter().find(|&&g| g >= group.order()) {
        return Err(Error::InvalidPdFunction(format!(
            "element index {bad} out of range"
        )));
    }
    f.check_conjugate_symmetry(group)?;
    let k = elements.len();
    Ok(DMatrix::from_fn(k, k, |i, j| {
        f.value(group.sub(elements[i], elements[j]))
    }))
}

/// Lift a real matrix to a complex one.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Hermitian eigenvalues in ascending order, with unit eigenvectors as the
/// matching columns. The input is symmetrized first; asymmetry beyond
/// `tol · scale` is an error.
fn hermitian_eigen(
    matrix: &DMatrix<Complex64>,
    tol: f64,
) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::BadParameter("matrix is not square".into()));
    }
    let scale = 1.0 + matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let asym = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > tol * scale {
        return Err(Error::NotHermitian(asym));
    }
    let hermitian = (matrix + matrix.adjoint()).scale(0.5);
    let eigen = nalgebra::linalg::SymmetricEigen::new(hermitian);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[a]
            .partial_cmp(&eigen.eigenvalues[b])
            .expect("hermitian eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eigen.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Spectral positive-semidefiniteness test: Hermitian within `tol`
/// (else an error), then `is_psd ⇔ min eigenvalue ≥ -tol`.
pub fn psd_check(matrix: &DMatrix<Complex64>, tol: f64) -> Result<(bool, f64)> {
    let (values, _) = hermitian_eigen(matrix, tol)?;
    let min = values.first().copied().unwrap_or(0.0);
    Ok((min >= -tol, min))
}

/// The exponential kernel value `exp(-‖x‖_p^p) = exp(-Σ |x_i|^p)`. The
/// kernel is positive definite for `1 ≤ p ≤ 2`; other positive exponents
/// are accepted but carry no such guarantee.
pub fn schoenberg_value(x: &[f64], p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::BadParameter(format!("exponent p = {p} must be positive")));
    }
    let sum: f64 = x.iter().map(|v| v.abs().powf(p)).sum();
    Ok((-sum).exp())
}

/// Kernel matrix `exp(-‖x_i - x_j‖_p^p)` over a point sample; real
/// symmetric with unit diagonal.
pub fn schoenberg_gram(points: &[Vec<f64>], p: f64) -> Result<DMatrix<f64>> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::BadParameter(format!("exponent p = {p} must be positive")));
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::BadParameter("empty point sample".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|x| x.len() != dim) {
        return Err(Error::BadParameter("points have mixed dimensions".into()));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let diff: Vec<f64> = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| a - b)
                .collect();
            m[(i, j)] = schoenberg_value(&diff, p)?;
        }
    }
    Ok(m)
}

/// The explicit cyclic representation built from a positive definite
/// function: Gram matrix, orthonormal quotient basis, one unitary matrix
/// per group element, and the coordinates of the identity indicator.
#[derive(Debug, Clone)]
pub struct GnsModel {
    /// Gram matrix over all group elements, `M[i][j] = f(g_j⁻¹ g_i)`.
    pub gram: DMatrix<Complex64>,
    /// Ascending eigenvalues of the form matrix.
    pub eigenvalues: Vec<f64>,
    /// Dimension of the quotient (the numerical rank of the Gram matrix).
    pub quotient_dim: usize,
    /// `n × r` matrix whose columns express the orthonormal quotient basis
    /// in indicator coordinates.
    pub quotient_basis: DMatrix<Complex64>,
    /// One `r × r` unitary per group element, indexed by element.
    pub rep: Vec<DMatrix<Complex64>>,
    /// Coordinates of the identity indicator's class in the quotient basis.
    pub cyclic: DVector<Complex64>,
}

/// Build the GNS model of `f` over the whole group.
///
/// The sesquilinear form `⟨x, y⟩ = Σ f(h⁻¹g) x(g) conj(y(h))` has form
/// matrix `A = gramᵀ`; its eigendecomposition splits the function space
/// into the null space (eigenvalues below `tol · max`) and the quotient.
/// Each representation matrix is the translation action conjugated into
/// the orthonormal quotient basis. Errors when the Gram matrix is not
/// positive semidefinite within `tol`.
pub fn gns_construct(
    group: &FiniteAbelianGroup,
    f: &PdFunction,
    tol: f64,
) -> Result<GnsModel> {
    let n = group.order();
    let elements: Vec<usize> = (0..n).collect();
    let gram = gram_matrix(group, f, &elements)?;
    let form = gram.transpose();

    let (values, vectors) = hermitian_eigen(&form, tol)?;
    let max_eig = values.last().copied().unwrap_or(0.0).max(0.0);
    let min_eig = values.first().copied().unwrap_or(0.0);
    if min_eig < -tol * (1.0 + max_eig) {
        return Err(Error::NotPsd(min_eig));
    }

    let threshold = tol * max_eig;
    let kept: Vec<usize> = (0..n).filter(|&i| values[i] > threshold).collect();
    let r = kept.len();

    // Quotient basis: unit eigenvectors scaled by 1/sqrt(eigenvalue), so
    // that the form makes them orthonormal.
    let mut basis = DMatrix::zeros(n, r);
    for (c, &i) in kept.iter().enumerate() {
        let scale = 1.0 / values[i].sqrt();
        for row in 0..n {
            basis[(row, c)] = vectors[(row, i)].scale(scale);
        }
    }

    // Translation action: T_g sends the indicator of s to the indicator of
    // g + s; in the quotient basis this is basisᴴ · form · P_g · basis.
    let bh_form = basis.adjoint() * &form;
    let mut rep = Vec::with_capacity(n);
    for g in 0..n {
        // (P_g · basis) has row g+s equal to row s of basis.
        let mut permuted = DMatrix::zeros(n, r);
        for s in 0..n {
            let target = group.add(g, s);
            for c in 0..r {
                permuted[(target, c)] = basis[(s, c)];
            }
        }
        rep.push(&bh_form * permuted);
    }

    let cyclic = DVector::from_fn(r, |k, _| bh_form[(k, group.identity())]);

    Ok(GnsModel {
        gram,
        eigenvalues: values,
        quotient_dim: r,
        quotient_basis: basis,
        rep,
        cyclic,
    })
}

/// Residual summary of a GNS model against its group and function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GnsReport {
    pub quotient_dim: usize,
    /// max over g of ‖T_gᴴ T_g − I‖ (Frobenius).
    pub unitarity: f64,
    /// max over (g, h) of ‖T_{g+h} − T_g T_h‖ (Frobenius).
    pub homomorphism: f64,
    /// max over g of |⟨T_g v, v⟩ − f(g)| for the cyclic vector v.
    pub f_recovery: f64,
    /// Numerical rank of the span of the cyclic vector's orbit.
    pub cyclic_rank: usize,
    /// `quotient_dim - cyclic_rank` as a float; 0 means the vector is cyclic.
    pub cyclicity_defect: f64,
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Check a model: unitarity, the homomorphism law over all element pairs,
/// recovery of `f` as the matrix coefficient of the cyclic vector, and
/// cyclicity of that vector. Always produces a report.
pub fn verify_representation(
    model: &GnsModel,
    group: &FiniteAbelianGroup,
    f: &PdFunction,
    tol: f64,
) -> GnsReport {
    let n = group.order();
    let r = model.quotient_dim;
    let eye = DMatrix::<Complex64>::identity(r, r);

    let mut unitarity = 0.0f64;
    for g in 0..n {
        let gap = frobenius(&(model.rep[g].adjoint() * &model.rep[g] - &eye));
        unitarity = unitarity.max(gap);
    }

    let mut homomorphism = 0.0f64;
    for g in 0..n {
        for h in 0..n {
            let gh = group.add(g, h);
            let gap = frobenius(&(&model.rep[gh] - &model.rep[g] * &model.rep[h]));
            homomorphism = homomorphism.max(gap);
        }
    }

    let mut f_recovery = 0.0f64;
    for g in 0..n {
        let moved = &model.rep[g] * &model.cyclic;
        let coeff: Complex64 = model
            .cyclic
            .iter()
            .zip(moved.iter())
            .map(|(c, m)| c.conj() * m)
            .sum();
        f_recovery = f_recovery.max((coeff - f.value(g)).norm());
    }

    // Rank of the orbit span via the Gram of the orbit vectors.
    let cyclic_rank = if r == 0 {
        0
    } else {
        let mut orbit = DMatrix::zeros(r, n);
        for g in 0..n {
            let moved = &model.rep[g] * &model.cyclic;
            for k in 0..r {
                orbit[(k, g)] = moved[k];
            }
        }
        let small = &orbit * orbit.adjoint();
        match hermitian_eigen(&small, tol.max(1e-12)) {
            Ok((values, _)) => {
                let max = values.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
                values.iter().filter(|&&v| v > 1e-12 * max).count()
            }
            Err(_) => 0,
        }
    };

    GnsReport {
        quotient_dim: r,
        unitarity,
        homomorphism,
        f_recovery,
        cyclic_rank,
        cyclicity_defect: (r as f64) - (cyclic_rank as f64),
    }
}
