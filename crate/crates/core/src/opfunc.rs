//! Matrix-valued functions τ: constants, rational Nevanlinna functions and
//! representation forms over a selfadjoint relation, with strictness,
//! decomposition, minimality and kernel diagnostics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{ComplexJson, MatrixJson};
use crate::krein::{KreinSpace, KreinSpaceJson, LinearRelation, Subspace};
use crate::linalg::{self, nullspace, re, Mat, C64, COND_MAX};

/// Anything that evaluates to a `g x g` matrix off its singularities.
pub trait MatrixFunction: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, lambda: C64) -> Result<Mat>;

    /// Known real singularities.
    fn poles(&self) -> Vec<f64> {
        vec![]
    }
}

/// Wraps a closure as a [`MatrixFunction`].
pub struct FnFunction<F: Fn(C64) -> Result<Mat> + Sync> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(C64) -> Result<Mat> + Sync> MatrixFunction for FnFunction<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, lambda: C64) -> Result<Mat> {
        (self.f)(lambda)
    }
}

/// Rectangle `re[0] <= Re λ <= re[1]`, `im[0] <= |Im λ| <= im[1]` of sample
/// points, used symmetrically in both half planes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Default for Window {
    fn default() -> Self {
        Window {
            re: [-2.0, 2.0],
            im: [0.5, 2.0],
        }
    }
}

impl Window {
    /// `count` seeded points alternating between the upper and lower half plane.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<C64> {
        let mut rng = linalg::rng(seed);
        (0..count)
            .map(|k| {
                let x = rng.random_range(self.re[0]..=self.re[1]);
                let y = rng.random_range(self.im[0]..=self.im[1]);
                if k % 2 == 0 {
                    C64::new(x, y)
                } else {
                    C64::new(x, -y)
                }
            })
            .collect()
    }

    pub fn max_modulus(&self) -> f64 {
        let x = self.re[0].abs().max(self.re[1].abs());
        let y = self.im[0].abs().max(self.im[1].abs());
        x.hypot(y)
    }
}

/// `τ(λ) = α1 + λ β1 + Σ_{i>=2} βi^{1/2} (αi - λ)^{-1} βi^{1/2}`.
#[derive(Debug, Clone)]
pub struct RationalNevanlinna {
    alpha: Vec<Mat>,
    beta: Vec<Mat>,
    beta_sqrt: Vec<Mat>,
}

impl RationalNevanlinna {
    /// Requires Hermitian `αi` and positive semidefinite `βi`.
    pub fn new(alpha: Vec<Mat>, beta: Vec<Mat>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::InvalidInput(format!(
                "need m >= 1 alpha/beta pairs, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        let g = alpha[0].nrows();
        for (k, (a, b)) in alpha.iter().zip(&beta).enumerate() {
            if a.shape() != (g, g) || b.shape() != (g, g) {
                return Err(Error::DimensionMismatch(format!("term {} is not {g}x{g}", k + 1)));
            }
            if linalg::hermitian_residual(a) > 1e-12 {
                return Err(Error::InvalidInput(format!("alpha_{} is not Hermitian", k + 1)));
            }
            if linalg::hermitian_residual(b) > 1e-12 {
                return Err(Error::InvalidInput(format!("beta_{} is not Hermitian", k + 1)));
            }
            if g > 0 && linalg::min_eigenvalue(b) < -1e-12 * b.norm() {
                return Err(Error::InvalidInput(format!(
                    "beta_{} is not positive semidefinite",
                    k + 1
                )));
            }
        }
        let alpha: Vec<Mat> = alpha.iter().map(linalg::hermitian_part).collect();
        let beta: Vec<Mat> = beta.iter().map(linalg::hermitian_part).collect();
        let beta_sqrt = beta.iter().map(linalg::psd_sqrt).collect();
        Ok(RationalNevanlinna {
            alpha,
            beta,
            beta_sqrt,
        })
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Mat] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Mat] {
        &self.beta
    }

    pub fn beta_sqrt(&self) -> &[Mat] {
        &self.beta_sqrt
    }

    /// `β1^{-1/2}`, or `BetaOneSingular`.
    pub fn beta1_inv_sqrt(&self) -> Result<Mat> {
        let b1 = &self.beta[0];
        let lmin = linalg::min_eigenvalue(b1);
        if self.dim() > 0 && lmin <= 1e-12 * b1.norm().max(1.0) {
            return Err(Error::BetaOneSingular(lmin));
        }
        Ok(linalg::pd_inv_sqrt(b1))
    }

    /// `∪_{i>=2} σ(αi)`, ascending.
    pub fn poles(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.alpha[1..]
            .iter()
            .flat_map(linalg::hermitian_eigenvalues)
            .collect();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        p
    }

    /// Equivalent minimal representation form anchored at the nonreal `λ0`.
    ///
    /// The state is `ran β1 ⊕ K2 ⊕ .. ⊕ Km`, where `Ki` is the smallest
    /// `αi`-invariant subspace containing `ran βi`. On it
    /// `A0 = ({0} x ran β1) ⊕ diag(αi|Ki)` and
    /// `γ = [β1^{1/2}; (αi - λ0)^{-1} βi^{1/2}]`. Works for singular `β1`.
    pub fn to_representation(&self, lambda0: C64) -> Result<RepresentationForm> {
        if lambda0.im == 0.0 {
            return Err(Error::InvalidInput("anchor lambda0 must be nonreal".into()));
        }
        let v1 = linalg::column_space(&self.beta[0], linalg::RTOL);
        let mut blocks_f = vec![linalg::zeros(v1.ncols(), v1.ncols())];
        let mut blocks_fp = vec![linalg::eye(v1.ncols())];
        let mut gammas = vec![v1.adjoint() * &self.beta_sqrt[0]];
        for i in 1..self.m() {
            let v = reachable_subspace(&self.alpha[i], &self.beta_sqrt[i]);
            let alpha = v.adjoint() * &self.alpha[i] * &v;
            let k = v.ncols();
            let inv = linalg::inverse_checked(&(&alpha - linalg::eye(k) * lambda0), COND_MAX)
                .map_err(|_| Error::PoleOrSpectrum(lambda0))?;
            gammas.push(inv * v.adjoint() * &self.beta_sqrt[i]);
            blocks_f.push(linalg::eye(k));
            blocks_fp.push(alpha);
        }
        let f = linalg::block_diag(&blocks_f.iter().collect::<Vec<_>>());
        let fp = linalg::block_diag(&blocks_fp.iter().collect::<Vec<_>>());
        let n = f.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("constant rational function has no representation state".into()));
        }
        let gamma = linalg::vstack(&gammas.iter().collect::<Vec<_>>());
        let space = KreinSpace::hilbert(n);
        let a0 = LinearRelation::new(space.clone(), &linalg::vstack(&[&f, &fp]))?;
        let c = linalg::hermitian_part(&self.eval(lambda0)?);
        RepresentationForm::new(space, a0, gamma, lambda0, c)
    }
}

/// Orthonormal basis of the smallest `α`-invariant subspace containing
/// `ran b`, for Hermitian `α`: the span of the projections of `b` onto the
/// eigenspaces of `α`.
fn reachable_subspace(alpha: &Mat, b: &Mat) -> Mat {
    let (vals, vecs) = linalg::hermitian_eigen(alpha);
    let tol = 1e-10 * vals.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let mut parts = vec![];
    let mut start = 0;
    for k in 1..=vals.len() {
        if k == vals.len() || vals[k] - vals[k - 1] > tol {
            let u = vecs.columns(start, k - start).into_owned();
            parts.push(&u * (u.adjoint() * b));
            start = k;
        }
    }
    linalg::column_space(&linalg::hstack(&parts.iter().collect::<Vec<_>>()), linalg::RTOL)
}

impl MatrixFunction for RationalNevanlinna {
    fn poles(&self) -> Vec<f64> {
        RationalNevanlinna::poles(self)
    }

    fn dim(&self) -> usize {
        self.alpha[0].nrows()
    }

    fn eval(&self, lambda: C64) -> Result<Mat> {
        let g = self.dim();
        let mut t = &self.alpha[0] + &self.beta[0] * lambda;
        for i in 1..self.m() {
            let shifted = &self.alpha[i] - linalg::eye(g) * lambda;
            let inv = linalg::inverse_checked(&shifted, COND_MAX)
                .map_err(|_| Error::PoleOrSpectrum(lambda))?;
            t += &self.beta_sqrt[i] * inv * &self.beta_sqrt[i];
        }
        Ok(t)
    }
}

/// `τ(λ) = C + γ+((λ - Re λ0) + (λ - λ0)(λ - conj λ0)(A0 - λ)^{-1}) γ`
/// with `γ+ = γ* G` (Euclidean boundary space).
#[derive(Debug, Clone)]
pub struct RepresentationForm {
    space: KreinSpace,
    a0: LinearRelation,
    gamma: Mat,
    lambda0: C64,
    c: Mat,
}

impl RepresentationForm {
    /// Requires `A0` selfadjoint, `λ0 ∈ ρ(A0)` and `C` Hermitian.
    pub fn new(space: KreinSpace, a0: LinearRelation, gamma: Mat, lambda0: C64, c: Mat) -> Result<Self> {
        let n = space.dim();
        let g = gamma.ncols();
        if a0.n() != n || gamma.nrows() != n || c.shape() != (g, g) {
            return Err(Error::DimensionMismatch(format!(
                "representation form: space {n}, A0 over {}, gamma {:?}, C {:?}",
                a0.n(),
                gamma.shape(),
                c.shape()
            )));
        }
        let (sa, r) = a0.is_selfadjoint();
        if !sa {
            return Err(Error::InvalidInput(format!(
                "A0 is not selfadjoint (residual {r:.3e})"
            )));
        }
        a0.resolvent(lambda0)?;
        if linalg::hermitian_residual(&c) > 1e-10 {
            return Err(Error::InvalidInput("C is not Hermitian".into()));
        }
        Ok(RepresentationForm {
            space,
            a0,
            gamma,
            lambda0,
            c: linalg::hermitian_part(&c),
        })
    }

    pub fn space(&self) -> &KreinSpace {
        &self.space
    }

    pub fn a0(&self) -> &LinearRelation {
        &self.a0
    }

    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    pub fn lambda0(&self) -> C64 {
        self.lambda0
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    /// `x* G`, the adjoint of a map from the boundary into the state.
    pub fn plus(&self, x: &Mat) -> Mat {
        x.adjoint() * self.space.gram()
    }

    /// `γ(λ) = (I + (λ - λ0)(A0 - λ)^{-1}) γ`.
    pub fn gamma_at(&self, lambda: C64) -> Result<Mat> {
        let r = self
            .a0
            .resolvent(lambda)
            .map_err(|_| Error::PoleOrSpectrum(lambda))?;
        Ok(&self.gamma + r * &self.gamma * (lambda - self.lambda0))
    }

    pub fn ker_gamma(&self) -> Subspace {
        Subspace::column_space(&nullspace(&self.gamma, 1e-10), 1e-10)
    }

    /// Restriction to the boundary subspace spanned by the orthonormal `q`:
    /// `q* τ q` in representation form.
    pub fn compress(&self, q: &Mat) -> Result<RepresentationForm> {
        RepresentationForm::new(
            self.space.clone(),
            self.a0.clone(),
            &self.gamma * q,
            self.lambda0,
            q.adjoint() * &self.c * q,
        )
    }

    /// Real points of `σ(A0)`, ascending.
    pub fn poles(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .a0
            .eigenvalues(self.lambda0)
            .unwrap_or_default()
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-8 * z.norm().max(1.0))
            .map(|z| z.re)
            .collect();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        p
    }
}

impl MatrixFunction for RepresentationForm {
    fn poles(&self) -> Vec<f64> {
        RepresentationForm::poles(self)
    }

    fn dim(&self) -> usize {
        self.gamma.ncols()
    }

    fn eval(&self, lambda: C64) -> Result<Mat> {
        let r = self
            .a0
            .resolvent(lambda)
            .map_err(|_| Error::PoleOrSpectrum(lambda))?;
        let l0 = self.lambda0;
        let n = self.space.dim();
        let inner = linalg::eye(n) * (lambda - re(l0.re)) + r * ((lambda - l0) * (lambda - l0.conj()));
        Ok(&self.c + self.plus(&self.gamma) * inner * &self.gamma)
    }
}

/// Selfadjoint constant `Θ`.
#[derive(Debug, Clone)]
pub struct ConstantFunction {
    theta: Mat,
}

impl ConstantFunction {
    pub fn new(theta: Mat) -> Result<Self> {
        if theta.nrows() != theta.ncols() {
            return Err(Error::DimensionMismatch("theta must be square".into()));
        }
        if linalg::hermitian_residual(&theta) > 1e-12 {
            return Err(Error::InvalidInput("theta is not Hermitian".into()));
        }
        Ok(ConstantFunction {
            theta: linalg::hermitian_part(&theta),
        })
    }

    pub fn theta(&self) -> &Mat {
        &self.theta
    }
}

impl MatrixFunction for ConstantFunction {
    fn dim(&self) -> usize {
        self.theta.nrows()
    }

    fn eval(&self, _lambda: C64) -> Result<Mat> {
        Ok(self.theta.clone())
    }
}

/// The supported boundary functions.
#[derive(Debug, Clone)]
pub enum OperatorFunction {
    Constant(ConstantFunction),
    Rational(RationalNevanlinna),
    Representation(RepresentationForm),
}

impl OperatorFunction {
    /// Real singularities: `σ(αi)` for `i >= 2`, or real points of `σ(A0)`.
    pub fn poles(&self) -> Vec<f64> {
        match self {
            OperatorFunction::Constant(_) => vec![],
            OperatorFunction::Rational(r) => r.poles(),
            OperatorFunction::Representation(r) => r.poles(),
        }
    }

    /// Rational functions with positive semidefinite βi are Nevanlinna.
    pub fn is_nevanlinna(&self) -> bool {
        matches!(self, OperatorFunction::Rational(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            OperatorFunction::Constant(_) => "constant",
            OperatorFunction::Rational(_) => "rational",
            OperatorFunction::Representation(_) => "representation",
        }
    }
}

impl MatrixFunction for OperatorFunction {
    fn poles(&self) -> Vec<f64> {
        OperatorFunction::poles(self)
    }

    fn dim(&self) -> usize {
        match self {
            OperatorFunction::Constant(f) => f.dim(),
            OperatorFunction::Rational(f) => f.dim(),
            OperatorFunction::Representation(f) => f.dim(),
        }
    }

    fn eval(&self, lambda: C64) -> Result<Mat> {
        match self {
            OperatorFunction::Constant(f) => f.eval(lambda),
            OperatorFunction::Rational(f) => f.eval(lambda),
            OperatorFunction::Representation(f) => f.eval(lambda),
        }
    }
}

/// Default strictness sample size `2g + 3`.
pub fn default_sample_count(g: usize) -> usize {
    2 * g + 3
}

/// `Ĝ = ∩ ker (τ(λ) - τ(μ0)*)/(λ - conj μ0)` with `μ0` the first sample.
pub fn strict_kernel(tau: &dyn MatrixFunction, samples: &[C64]) -> Result<Subspace> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: samples.len(),
        });
    }
    let g = tau.dim();
    let mu0 = samples[0];
    let t0s = tau.eval(mu0)?.adjoint();
    let mut blocks = Vec::new();
    for &l in &samples[1..] {
        let d = l - mu0.conj();
        if d.norm() <= 1e-12 * l.norm().max(1.0) {
            continue;
        }
        blocks.push((tau.eval(l)? - &t0s) / d);
    }
    if blocks.is_empty() {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: 1,
        });
    }
    let refs: Vec<&Mat> = blocks.iter().collect();
    let stacked = linalg::vstack(&refs);
    if stacked.norm() == 0.0 {
        return Ok(Subspace::full(g));
    }
    Ok(Subspace::column_space(&nullspace(&stacked, 1e-9), 1e-10))
}

/// Block splitting of τ along `G' ⊕ Ĝ`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub mu0: C64,
    /// Orthonormal basis `Q'` of `G' = Ĝ^⊥`.
    pub q_strict: Mat,
    /// Orthonormal basis `Q^` of `Ĝ`.
    pub q_hat: Mat,
    /// `Q'* τ(μ0) Q^`.
    pub c12: Mat,
    /// `Q^* τ(μ0) Q'`.
    pub c21: Mat,
    /// `Q^* τ(μ0) Q^`, symmetrized.
    pub theta: Mat,
}

impl Decomposition {
    /// Unitary `[Q' Q^]`.
    pub fn unitary(&self) -> Mat {
        linalg::hstack(&[&self.q_strict, &self.q_hat])
    }

    /// Strict part `Q'* τ(λ) Q'`.
    pub fn strict_block(&self, tau: &dyn MatrixFunction, lambda: C64) -> Result<Mat> {
        Ok(self.q_strict.adjoint() * tau.eval(lambda)? * &self.q_strict)
    }

    /// Reassembles the full matrix from a strict block.
    pub fn reassemble(&self, strict: &Mat) -> Mat {
        let block = linalg::vstack(&[
            &linalg::hstack(&[strict, &self.c12]),
            &linalg::hstack(&[&self.c21, &self.theta]),
        ]);
        let u = self.unitary();
        &u * block * u.adjoint()
    }
}

pub fn decompose(tau: &dyn MatrixFunction, ghat: &Subspace, mu0: C64) -> Result<Decomposition> {
    if ghat.ambient() != tau.dim() {
        return Err(Error::DimensionMismatch("Ĝ must live in the boundary space".into()));
    }
    let q_hat = ghat.basis().clone();
    let q_strict = ghat.complement().basis().clone();
    let t0 = tau.eval(mu0)?;
    Ok(Decomposition {
        mu0,
        c12: q_strict.adjoint() * &t0 * &q_hat,
        c21: q_hat.adjoint() * &t0 * &q_strict,
        theta: linalg::hermitian_part(&(q_hat.adjoint() * &t0 * &q_hat)),
        q_strict,
        q_hat,
    })
}

/// Whether `span{γ(λ) x}` over the samples fills the state space, and its dimension.
pub fn check_minimality(rf: &RepresentationForm, samples: &[C64]) -> Result<(bool, usize)> {
    let cols: Vec<Mat> = samples
        .iter()
        .map(|&l| rf.gamma_at(l))
        .collect::<Result<_>>()?;
    let refs: Vec<&Mat> = cols.iter().collect();
    let span = linalg::hstack(&refs);
    let n = rf.space().dim();
    let r = if span.ncols() == 0 {
        0
    } else {
        linalg::rank(&span, 1e-9)
    };
    Ok((r == n, r))
}

/// Number of negative eigenvalues of the block kernel matrix
/// `[K(λi, λj)]`, `K(λ, μ) = (τ(λ) - τ(μ)*)/(λ - conj μ)`.
pub fn negative_squares(tau: &dyn MatrixFunction, points: &[C64]) -> Result<usize> {
    let g = tau.dim();
    let n = points.len();
    if points.iter().any(|z| z.im <= 0.0) {
        return Err(Error::InvalidInput("kernel points must lie in the upper half plane".into()));
    }
    let vals: Vec<Mat> = points.iter().map(|&l| tau.eval(l)).collect::<Result<_>>()?;
    let mut k = linalg::zeros(n * g, n * g);
    for i in 0..n {
        for j in 0..n {
            let block = (&vals[i] - vals[j].adjoint()) / (points[i] - points[j].conj());
            k.view_mut((i * g, j * g), (g, g)).copy_from(&block);
        }
    }
    Ok(linalg::inertia(&k, 1e-9).0)
}

/// JSON form of a boundary function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TauJson {
    Rational {
        alpha: Vec<MatrixJson>,
        beta: Vec<MatrixJson>,
    },
    Constant {
        theta: MatrixJson,
    },
    Representation {
        space: KreinSpaceJson,
        /// `2n x n` basis of A0.
        #[serde(default)]
        a0: Option<MatrixJson>,
        /// Alternatively, A0 as an `n x n` matrix.
        #[serde(default)]
        a0_operator: Option<MatrixJson>,
        gamma: MatrixJson,
        lambda0: ComplexJson,
        c: MatrixJson,
    },
}

impl TauJson {
    /// Boundary dimension fixed by explicit matrices, if any.
    pub fn explicit_dim(&self) -> Option<usize> {
        match self {
            TauJson::Rational { alpha, beta } => {
                alpha.iter().chain(beta).find_map(MatrixJson::explicit_dim)
            }
            TauJson::Constant { theta } => theta.explicit_dim(),
            TauJson::Representation { gamma, .. } => gamma.to_matrix().ok().map(|g| g.ncols()),
        }
    }

    /// Builds τ; scalar entries become multiples of the identity on `C^g`.
    pub fn build(&self, g: Option<usize>) -> Result<OperatorFunction> {
        let g = match (self.explicit_dim(), g) {
            (Some(d), Some(g)) if d != g => {
                return Err(Error::DimensionMismatch(format!(
                    "tau has dimension {d}, boundary has {g}"
                )))
            }
            (Some(d), _) => d,
            (None, Some(g)) => g,
            (None, None) => 1,
        };
        match self {
            TauJson::Rational { alpha, beta } => {
                let a = alpha.iter().map(|m| m.to_matrix_sized(g, g)).collect::<Result<_>>()?;
                let b = beta.iter().map(|m| m.to_matrix_sized(g, g)).collect::<Result<_>>()?;
                Ok(OperatorFunction::Rational(RationalNevanlinna::new(a, b)?))
            }
            TauJson::Constant { theta } => Ok(OperatorFunction::Constant(ConstantFunction::new(
                theta.to_matrix_sized(g, g)?,
            )?)),
            TauJson::Representation {
                space,
                a0,
                a0_operator,
                gamma,
                lambda0,
                c,
            } => {
                let space = space.build()?;
                let n = space.dim();
                let a0 = match (a0, a0_operator) {
                    (Some(b), None) => LinearRelation::new(space.clone(), &b.to_matrix_sized(2 * n, n)?)?,
                    (None, Some(op)) => LinearRelation::graph(space.clone(), &op.to_matrix_sized(n, n)?)?,
                    _ => {
                        return Err(Error::InvalidInput(
                            "representation needs exactly one of a0, a0_operator".into(),
                        ))
                    }
                };
                let rf = RepresentationForm::new(
                    space,
                    a0,
                    gamma.to_matrix_sized(n, g)?,
                    lambda0.0,
                    c.to_matrix_sized(g, g)?,
                )?;
                Ok(OperatorFunction::Representation(rf))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eye};

    fn scalar(x: f64) -> Mat {
        Mat::from_element(1, 1, re(x))
    }

    fn diag_lambda_five() -> FnFunction<impl Fn(C64) -> Result<Mat> + Sync> {
        FnFunction {
            dim: 2,
            f: |l: C64| Ok(Mat::from_row_slice(2, 2, &[l, re(0.0), re(0.0), re(5.0)])),
        }
    }

    #[test]
    fn rational_examples() {
        let t = RationalNevanlinna::new(vec![scalar(0.0)], vec![scalar(1.0)]).unwrap();
        assert!((t.eval(c(0.0, 1.0)).unwrap()[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        let t = RationalNevanlinna::new(vec![scalar(0.0), scalar(0.0)], vec![scalar(1.0), scalar(1.0)]).unwrap();
        assert!((t.eval(re(2.0)).unwrap()[(0, 0)] - re(1.5)).norm() < 1e-15);
        assert!(matches!(t.eval(re(0.0)), Err(Error::PoleOrSpectrum(_))));
        assert_eq!(t.poles(), vec![0.0]);
    }

    #[test]
    fn rational_rejects_indefinite_beta() {
        assert!(RationalNevanlinna::new(vec![scalar(0.0)], vec![scalar(-1.0)]).is_err());
    }

    #[test]
    fn representation_scalar_example() {
        let h = KreinSpace::hilbert(1);
        let a0 = LinearRelation::graph(h.clone(), &scalar(1.0)).unwrap();
        let rf = RepresentationForm::new(h, a0, scalar(1.0), c(0.0, 1.0), scalar(0.0)).unwrap();
        for l in [c(2.0, 0.5), c(-1.0, -3.0), re(0.3)] {
            let brute = l + (l - c(0.0, 1.0)) * (l + c(0.0, 1.0)) / (re(1.0) - l);
            assert!((rf.eval(l).unwrap()[(0, 0)] - brute).norm() < 1e-13);
        }
        let p = rf.poles();
        assert!(p.len() == 1 && (p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strict_kernel_examples() {
        let lam = FnFunction {
            dim: 2,
            f: |l: C64| Ok(eye(2) * l),
        };
        let s = Window::default().sample(1, 7);
        assert_eq!(strict_kernel(&lam, &s).unwrap().dim(), 0);
        let k = strict_kernel(&diag_lambda_five(), &s).unwrap();
        assert_eq!(k.dim(), 1);
        assert!(k.basis()[(0, 0)].norm() < 1e-12);
        assert!(strict_kernel(&lam, &s[..1]).is_err());
    }

    #[test]
    fn strict_kernel_matches_ker_gamma() {
        // γ with a zero second column: Ĝ = ker γ = span(e2)
        let h = KreinSpace::hilbert(2);
        let a0 = LinearRelation::graph(h.clone(), &Mat::from_diagonal(&linalg::Vector::from_vec(vec![re(1.0), re(-2.0)]))).unwrap();
        let gamma = Mat::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.5), re(0.0)]);
        let rf = RepresentationForm::new(h, a0, gamma, c(0.0, 1.0), eye(2)).unwrap();
        let k = strict_kernel(&rf, &Window::default().sample(4, 7)).unwrap();
        assert!(k.distance(&rf.ker_gamma()) < 1e-10);
    }

    #[test]
    fn decompose_diag_example() {
        let f = diag_lambda_five();
        let s = Window::default().sample(2, 7);
        let k = strict_kernel(&f, &s).unwrap();
        let d = decompose(&f, &k, c(0.0, 1.0)).unwrap();
        let l = c(0.7, 1.3);
        let sb = d.strict_block(&f, l).unwrap();
        assert!((sb[(0, 0)] - l).norm() < 1e-12);
        assert!((d.theta[(0, 0)] - re(5.0)).norm() < 1e-12);
        assert!(d.c12.norm() < 1e-12 && d.c21.norm() < 1e-12);
        assert!((d.reassemble(&sb) - f.eval(l).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn minimality_examples() {
        let h = KreinSpace::hilbert(1);
        let a0 = LinearRelation::graph(h.clone(), &scalar(1.0)).unwrap();
        let rf = RepresentationForm::new(h, a0, scalar(2.0), c(0.0, 1.0), scalar(0.0)).unwrap();
        assert_eq!(check_minimality(&rf, &[c(0.0, 1.0)]).unwrap(), (true, 1));
        // A0 = diag(1, 3) with γ supported on the first block only
        let h = KreinSpace::hilbert(2);
        let a0 = LinearRelation::graph(h.clone(), &Mat::from_diagonal(&linalg::Vector::from_vec(vec![re(1.0), re(3.0)]))).unwrap();
        let gamma = Mat::from_row_slice(2, 1, &[re(1.0), re(0.0)]);
        let rf = RepresentationForm::new(h, a0, gamma, c(0.0, 1.0), scalar(0.0)).unwrap();
        assert_eq!(check_minimality(&rf, &Window::default().sample(3, 5)).unwrap(), (false, 1));
    }

    #[test]
    fn negative_squares_examples() {
        let pts = [c(0.1, 1.0), c(-0.5, 0.4), c(1.0, 2.0)];
        let t = RationalNevanlinna::new(vec![scalar(0.3), scalar(1.0)], vec![scalar(2.0), scalar(0.5)]).unwrap();
        assert_eq!(negative_squares(&t, &pts).unwrap(), 0);
        let minus = FnFunction {
            dim: 1,
            f: |l: C64| Ok(Mat::from_element(1, 1, -l)),
        };
        assert_eq!(negative_squares(&minus, &pts[..1]).unwrap(), 1);
        let cube = FnFunction {
            dim: 1,
            f: |l: C64| Ok(Mat::from_element(1, 1, l * l * l)),
        };
        assert!(negative_squares(&cube, &pts).unwrap() >= 1);
        assert!(negative_squares(&cube, &[c(0.0, -1.0)]).is_err());
    }

    #[test]
    fn rational_to_representation_agrees() {
        let mut r = linalg::rng(11);
        let g = 2;
        let alpha = vec![linalg::random_hermitian(&mut r, g), linalg::random_hermitian(&mut r, g), linalg::random_hermitian(&mut r, g)];
        let beta = vec![linalg::random_psd(&mut r, g, 1), linalg::random_psd(&mut r, g, 2), linalg::random_psd(&mut r, g, 1)];
        let t = RationalNevanlinna::new(alpha, beta).unwrap();
        let rf = t.to_representation(c(0.2, 1.5)).unwrap();
        assert_eq!(rf.space().dim(), 5);
        assert!(check_minimality(&rf, &Window::default().sample(5, 8)).unwrap().0);
        for l in Window::default().sample(5, 8) {
            let a = t.eval(l).unwrap();
            assert!((rf.eval(l).unwrap() - &a).norm() < 1e-11 * a.norm());
        }
    }

    #[test]
    fn tau_json_scalar_shorthand() {
        let j: TauJson = serde_json::from_str(r#"{"kind":"rational","alpha":[0, 2],"beta":[1, [0.5, 0]]}"#).unwrap();
        let t = j.build(Some(3)).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.poles(), vec![2.0, 2.0, 2.0]);
        let j: TauJson = serde_json::from_str(r#"{"kind":"constant","theta":[[1,0],[0,2]]}"#).unwrap();
        assert!(j.build(Some(3)).is_err());
        let j: TauJson = serde_json::from_str(
            r#"{"kind":"representation","space":{"dim":1},"a0_operator":[[1]],"gamma":[[1]],"lambda0":[0,1],"c":[[0]]}"#,
        )
        .unwrap();
        assert_eq!(j.build(None).unwrap().kind(), "representation");
    }
}
