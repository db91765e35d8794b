//! Boundary triples whose Weyl function is a prescribed τ.
//!
//! Strict representation forms are realized directly over their own state
//! space; selfadjoint constants over `C^{2g}` with the indefinite metric
//! `J = [[0, I], [I, 0]]`; non-strict functions by coupling the two along the
//! splitting `G' ⊕ Ĝ`. Rational Nevanlinna functions with positive definite
//! `β1` have an explicit Hilbert-space realization.

use crate::error::{Error, Result};
use crate::krein::KreinSpace;
use crate::linalg::{self, Mat, C64, RTOL};
use crate::opfunc::{
    self, check_minimality, decompose, strict_kernel, ConstantFunction, MatrixFunction,
    OperatorFunction, RationalNevanlinna, RepresentationForm, Window,
};
use crate::triple::BoundaryTriple;

/// Tolerance on `||c12* - c21||` relative to the block sizes.
const ADJOINT_TOL: f64 = 1e-8;

/// Triple for a strict representation form, anchored at `μ ∈ ρ(A0)`.
///
/// `T = A0 ∔ {γ(μ)x, μγ(μ)x}` with `Γ0 = x` and
/// `Γ1 = γ(μ)+(f0' - conj μ f0) + τ(μ)x`.
pub fn realize_strict(rf: &RepresentationForm, mu: C64) -> Result<BoundaryTriple> {
    let g = rf.dim();
    let n = rf.space().dim();
    let r = linalg::rank(rf.gamma(), RTOL);
    if r < g {
        return Err(Error::NotStrict { kernel_dim: g - r });
    }
    let res = rf.a0().resolvent(mu)?;
    let gmu = rf.gamma() + res * rf.gamma() * (mu - rf.lambda0());
    let tau_mu = rf.eval(mu)?;
    let f = rf.a0().first();
    let fp = rf.a0().second();
    let basis = linalg::vstack(&[
        &linalg::hstack(&[&f, &gmu]),
        &linalg::hstack(&[&fp, &(&gmu * mu)]),
    ]);
    let g0 = linalg::hstack(&[&linalg::zeros(g, n), &linalg::eye(g)]);
    let g1 = linalg::hstack(&[&(rf.plus(&gmu) * (fp - f * mu.conj())), &tau_mu]);
    BoundaryTriple::new(rf.space().clone(), linalg::eye(g), basis, g0, g1)
}

/// Triple with constant Weyl function `Θ` over `(C^{2g}, J)`.
///
/// `A0` is the graph of `B0 = [[ϑ, I], [0, conj ϑ]]`; the defect spaces are
/// all `C^g x {0}`. The anchors are `λ0 = μ = Re ϑ`.
pub fn realize_constant(theta: &Mat, vartheta: C64) -> Result<BoundaryTriple> {
    if vartheta.im == 0.0 {
        return Err(Error::RealTheta(vartheta));
    }
    ConstantFunction::new(theta.clone())?;
    let g = theta.nrows();
    let id = linalg::eye(g);
    let zero = linalg::zeros(g, g);
    let j = linalg::vstack(&[&linalg::hstack(&[&zero, &id]), &linalg::hstack(&[&id, &zero])]);
    let state = KreinSpace::new(j.clone(), Some(j))?;
    let mu = vartheta.re;
    let b0 = constant_b0(g, vartheta);
    let top = linalg::vstack(&[&id, &zero]);
    let basis = linalg::vstack(&[
        &linalg::hstack(&[&linalg::eye(2 * g), &top]),
        &linalg::hstack(&[&b0, &(&top * linalg::re(mu))]),
    ]);
    let g0 = linalg::hstack(&[&linalg::zeros(g, 2 * g), &id]);
    // γ^(μ)+ (x, y) = y, applied to (B0 - conj μ) g0
    let gamma_plus = linalg::hstack(&[&zero, &id]);
    let shifted = &b0 - linalg::eye(2 * g) * linalg::re(mu);
    let g1 = linalg::hstack(&[&(gamma_plus * shifted), &linalg::hermitian_part(theta)]);
    BoundaryTriple::new(state, id, basis, g0, g1)
}

/// `B0 = [[ϑ I, I], [0, conj ϑ I]]`.
pub fn constant_b0(g: usize, vartheta: C64) -> Mat {
    let id = linalg::eye(g);
    linalg::vstack(&[
        &linalg::hstack(&[&(&id * vartheta), &id]),
        &linalg::hstack(&[&linalg::zeros(g, g), &(&id * vartheta.conj())]),
    ])
}

/// Product triple over `K = H x H~` with boundary `G' ⊕ Ĝ`,
/// `Γ0 = diag(Γ0', Γ0^)` and
/// `Γ1 = [Γ1' + c12 Γ0^; Γ1^ + c21 Γ0']`.
pub fn couple(t_strict: &BoundaryTriple, t_const: &BoundaryTriple, c12: &Mat, c21: &Mat) -> Result<BoundaryTriple> {
    let (gs, gc) = (t_strict.g(), t_const.g());
    if c12.shape() != (gs, gc) || c21.shape() != (gc, gs) {
        return Err(Error::DimensionMismatch(format!(
            "coupling blocks {:?} and {:?} do not fit boundaries {gs} and {gc}",
            c12.shape(),
            c21.shape()
        )));
    }
    let dev = (c12.adjoint() - c21).norm();
    if dev > ADJOINT_TOL * (1.0 + c12.norm() + c21.norm()) {
        return Err(Error::NonAdjointBlocks(dev));
    }
    if gc == 0 {
        return Ok(t_strict.clone());
    }
    if gs == 0 {
        return Ok(t_const.clone());
    }
    let state = t_strict.state().product(t_const.state());
    let basis = linalg::vstack(&[
        &linalg::block_diag(&[&t_strict.basis_first(), &t_const.basis_first()]),
        &linalg::block_diag(&[&t_strict.basis_second(), &t_const.basis_second()]),
    ]);
    let gb = linalg::block_diag(&[t_strict.boundary_gram(), t_const.boundary_gram()]);
    let g0 = linalg::block_diag(&[t_strict.g0(), t_const.g0()]);
    let g1 = linalg::vstack(&[
        &linalg::hstack(&[t_strict.g1(), &(c12 * t_const.g0())]),
        &linalg::hstack(&[&(c21 * t_strict.g0()), t_const.g1()]),
    ]);
    BoundaryTriple::new(state, gb, basis, g0, g1)
}

/// Explicit Hilbert-space triple for a rational Nevanlinna function with
/// `β1 > 0`.
///
/// State `(C^g)^m` with elements `(k1, .., km)`; `T` is parameterized by
/// `(k1, .., km, k1')` with second component
/// `(k1', βi^{1/2} β1^{-1/2} k1 + αi ki)`, `Γ0 = β1^{-1/2} k1` and
/// `Γ1 = α1 β1^{-1/2} k1 + β1^{1/2} k1' - Σ βi^{1/2} ki`.
pub fn realize_rational(tau: &RationalNevanlinna) -> Result<BoundaryTriple> {
    let p_inv = tau.beta1_inv_sqrt()?;
    let g = tau.dim();
    let m = tau.m();
    let n = m * g;
    let p = n + g;
    let bf = linalg::hstack(&[&linalg::eye(n), &linalg::zeros(n, g)]);
    let mut bfp = linalg::zeros(n, p);
    bfp.view_mut((0, n), (g, g)).copy_from(&linalg::eye(g));
    for i in 1..m {
        let o = i * g;
        bfp.view_mut((o, 0), (g, g))
            .copy_from(&(&tau.beta_sqrt()[i] * &p_inv));
        bfp.view_mut((o, o), (g, g)).copy_from(&tau.alpha()[i]);
    }
    let mut g0 = linalg::zeros(g, p);
    g0.view_mut((0, 0), (g, g)).copy_from(&p_inv);
    let mut g1 = linalg::zeros(g, p);
    g1.view_mut((0, 0), (g, g)).copy_from(&(&tau.alpha()[0] * &p_inv));
    for i in 1..m {
        g1.view_mut((0, i * g), (g, g))
            .copy_from(&(-&tau.beta_sqrt()[i]));
    }
    g1.view_mut((0, n), (g, g)).copy_from(&tau.beta_sqrt()[0]);
    BoundaryTriple::new(
        KreinSpace::hilbert(n),
        linalg::eye(g),
        linalg::vstack(&[&bf, &bfp]),
        g0,
        g1,
    )
}

/// Choices left free by the constructions.
#[derive(Default, Debug, Clone, Copy)]
pub struct RealizeOptions {
    /// Sample window for the strictness analysis and verification.
    pub window: Window,
    pub seed: u64,
    /// Decomposition anchor; defaults to the first window sample.
    pub mu0: Option<C64>,
    /// Spectrum of the constant block; defaults to `i (2 + max |window|)`.
    pub vartheta: Option<C64>,
}

impl RealizeOptions {
    pub fn vartheta(&self) -> C64 {
        self.vartheta
            .unwrap_or_else(|| C64::new(0.0, 2.0 + self.window.max_modulus()))
    }

    /// Strictness samples, led by `μ0` when it is given.
    pub fn samples(&self, g: usize) -> Vec<C64> {
        let mut s = self.window.sample(self.seed, opfunc::default_sample_count(g));
        if let Some(mu0) = self.mu0 {
            s.insert(0, mu0);
        }
        s
    }
}

/// Which construction produced the triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealizationPath {
    Constant,
    Rational,
    Strict,
    Coupled,
}

impl RealizationPath {
    pub fn name(&self) -> &'static str {
        match self {
            RealizationPath::Constant => "constant",
            RealizationPath::Rational => "rational",
            RealizationPath::Strict => "strict",
            RealizationPath::Coupled => "coupled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Realization {
    pub triple: BoundaryTriple,
    pub path: RealizationPath,
    /// `dim Ĝ`.
    pub strict_kernel_dim: usize,
    /// Minimality of the underlying representation form over the samples.
    pub minimal: Option<(bool, usize)>,
    pub vartheta: Option<C64>,
}

/// Realizes τ as a Weyl function: rational functions with `β1 > 0` use the
/// explicit construction, constants the Krein-space block, and everything
/// else the strict/constant coupling of a representation form.
pub fn realize(tau: &OperatorFunction, opts: &RealizeOptions) -> Result<Realization> {
    match tau {
        OperatorFunction::Constant(c) => {
            let vt = opts.vartheta();
            Ok(Realization {
                triple: realize_constant(c.theta(), vt)?,
                path: RealizationPath::Constant,
                strict_kernel_dim: c.dim(),
                minimal: None,
                vartheta: Some(vt),
            })
        }
        OperatorFunction::Rational(r) => match realize_rational(r) {
            Ok(t) => Ok(Realization {
                triple: t,
                path: RealizationPath::Rational,
                strict_kernel_dim: 0,
                minimal: None,
                vartheta: None,
            }),
            Err(Error::BetaOneSingular(_)) => {
                let rf = r.to_representation(C64::new(0.0, 1.0))?;
                realize_representation(&rf, opts)
            }
            Err(e) => Err(e),
        },
        OperatorFunction::Representation(rf) => realize_representation(rf, opts),
    }
}

/// Strict kernel, decomposition, strict and constant realizations, coupling,
/// and rotation back to the original boundary coordinates.
pub fn realize_representation(rf: &RepresentationForm, opts: &RealizeOptions) -> Result<Realization> {
    let g = rf.dim();
    let samples = opts.samples(g);
    let minimal = Some(check_minimality(rf, &samples)?);
    let ghat = strict_kernel(rf, &samples)?;
    if ghat.dim() == 0 {
        return Ok(Realization {
            triple: realize_strict(rf, rf.lambda0())?,
            path: RealizationPath::Strict,
            strict_kernel_dim: 0,
            minimal,
            vartheta: None,
        });
    }
    let dec = decompose(rf, &ghat, samples[0])?;
    let vt = opts.vartheta();
    let t_const = realize_constant(&dec.theta, vt)?;
    let coupled = if dec.q_strict.ncols() == 0 {
        t_const
    } else {
        let rs = rf.compress(&dec.q_strict)?;
        let t_strict = realize_strict(&rs, rs.lambda0())?;
        let dev = (dec.c12.adjoint() - &dec.c21).norm();
        if dev > ADJOINT_TOL * (1.0 + dec.c12.norm() + dec.c21.norm()) {
            return Err(Error::NonAdjointBlocks(dev));
        }
        let c12 = (&dec.c12 + dec.c21.adjoint()) * linalg::re(0.5);
        couple(&t_strict, &t_const, &c12, &c12.adjoint())?
    };
    let u = dec.unitary();
    let triple = BoundaryTriple::new(
        coupled.state().clone(),
        linalg::eye(g),
        coupled.basis().clone(),
        &u * coupled.g0(),
        &u * coupled.g1(),
    )?;
    Ok(Realization {
        triple,
        path: RealizationPath::Coupled,
        strict_kernel_dim: ghat.dim(),
        minimal,
        vartheta: Some(vt),
    })
}
