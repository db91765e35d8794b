//! Boundary triples stored in coordinates of a basis of `T = dom Γ`.
//!
//! A triple holds a `2n x p` basis `B = [B_f; B_f']` of `T` and `g x p`
//! matrices `G0`, `G1` giving `Γ0`, `Γ1` on basis coordinates. In these terms
//! the Green identity reads
//! `B_f* G B_f' - B_f'* G B_f = G0* Gb G1 - G1* Gb G0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::MatrixJson;
use crate::krein::{KreinSpace, KreinSpaceJson, LinearRelation, Subspace};
use crate::linalg::{self, nullspace, Mat, C64, COND_MAX, RTOL};

#[derive(Debug, Clone)]
pub struct BoundaryTriple {
    state: KreinSpace,
    gb: Mat,
    gb_inv: Mat,
    basis: Mat,
    g0: Mat,
    g1: Mat,
    a0: LinearRelation,
    pinv: Mat,
}

/// γ(λ) and M(λ) at one point.
#[derive(Debug, Clone)]
pub struct WeylData {
    pub lambda: C64,
    pub gamma: Mat,
    pub m: Mat,
}

/// Maximum relative residuals of the identities satisfied by γ and M.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `γ(λ) = (I + (λ-μ)(A0-λ)^{-1}) γ(μ)`
    pub gamma_shift: f64,
    /// `M(λ) - M(μ)* = (λ - conj μ) γ(μ)+ γ(λ)`
    pub weyl_difference: f64,
    /// `γ(conj λ)+ h = Γ1{(A0-λ)^{-1} h, (I + λ(A0-λ)^{-1}) h}`
    pub gamma_adjoint: f64,
    /// `M(λ) = Re M(λ0) + γ(λ0)+((λ - Re λ0) + (λ-λ0)(λ-conj λ0)(A0-λ)^{-1}) γ(λ0)`
    pub weyl_representation: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.gamma_shift.max(self.weyl_difference).max(self.gamma_adjoint).max(self.weyl_representation)
    }
}

impl BoundaryTriple {
    /// Requires `dim T = n + g`, a full-rank basis, a positive definite
    /// boundary Gram and a surjective `Γ0`.
    pub fn new(state: KreinSpace, gb: Mat, basis: Mat, g0: Mat, g1: Mat) -> Result<Self> {
        let n = state.dim();
        let g = gb.nrows();
        let p = basis.ncols();
        if gb.ncols() != g {
            return Err(Error::DimensionMismatch("boundary Gram must be square".into()));
        }
        if basis.nrows() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "T basis has {} rows, expected {}",
                basis.nrows(),
                2 * n
            )));
        }
        if p != n + g {
            return Err(Error::DimensionMismatch(format!(
                "dim T = {p}, expected n + g = {}",
                n + g
            )));
        }
        if g0.shape() != (g, p) || g1.shape() != (g, p) {
            return Err(Error::DimensionMismatch(format!(
                "boundary maps must be {g}x{p}, got {:?} and {:?}",
                g0.shape(),
                g1.shape()
            )));
        }
        if g > 0 && linalg::min_eigenvalue(&gb) <= 0.0 {
            return Err(Error::InvalidInput("boundary Gram is not positive definite".into()));
        }
        if linalg::rank(&basis, RTOL) != p {
            return Err(Error::InvalidInput("T basis is rank deficient".into()));
        }
        if linalg::rank(&g0, RTOL) != g {
            return Err(Error::InvalidInput("Gamma0 is not surjective".into()));
        }
        let a0 = LinearRelation::new(state.clone(), &(&basis * nullspace(&g0, RTOL)))?;
        let pinv = basis
            .clone()
            .svd(true, true)
            .pseudo_inverse(0.0)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let gb_inv = linalg::inverse_checked(&gb, COND_MAX)
            .map_err(|_| Error::InvalidInput("boundary Gram is singular".into()))?;
        Ok(BoundaryTriple {
            state,
            gb,
            gb_inv,
            basis,
            g0,
            g1,
            a0,
            pinv,
        })
    }

    pub fn state(&self) -> &KreinSpace {
        &self.state
    }

    pub fn boundary_gram(&self) -> &Mat {
        &self.gb
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn basis_first(&self) -> Mat {
        self.basis.rows(0, self.n()).into_owned()
    }

    pub fn basis_second(&self) -> Mat {
        self.basis.rows(self.n(), self.n()).into_owned()
    }

    pub fn g0(&self) -> &Mat {
        &self.g0
    }

    pub fn g1(&self) -> &Mat {
        &self.g1
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.state.dim()
    }

    /// Boundary dimension.
    pub fn g(&self) -> usize {
        self.gb.nrows()
    }

    /// `dim T`.
    pub fn p(&self) -> usize {
        self.basis.ncols()
    }

    /// `A0 = ker Γ0`.
    pub fn a0(&self) -> &LinearRelation {
        &self.a0
    }

    /// `A = ker Γ`.
    pub fn a_min(&self) -> Result<LinearRelation> {
        let both = linalg::vstack(&[&self.g0, &self.g1]);
        LinearRelation::new(self.state.clone(), &(&self.basis * nullspace(&both, RTOL)))
    }

    /// Relative residual of the Green identity over the full basis of `T`.
    pub fn green_residual(&self) -> f64 {
        let bf = self.basis_first();
        let bfp = self.basis_second();
        let g = self.state.gram();
        let lhs = bf.adjoint() * g * &bfp - bfp.adjoint() * g * &bf;
        let rhs = self.g0.adjoint() * &self.gb * &self.g1 - self.g1.adjoint() * &self.gb * &self.g0;
        let scale = 2.0 * bf.norm() * g.norm() * bfp.norm()
            + 2.0 * self.g0.norm() * self.gb.norm() * self.g1.norm();
        linalg::rel((lhs - rhs).norm(), scale)
    }

    /// Selfadjointness residual of `A0` and symmetry residual of `A`.
    pub fn extension_residuals(&self) -> Result<(f64, f64)> {
        Ok((self.a0.is_selfadjoint().1, self.a_min()?.is_symmetric().1))
    }

    /// Coordinates in the `T` basis of pairs known to lie in `T`.
    pub fn coordinates(&self, pairs: &Mat) -> Mat {
        &self.pinv * pairs
    }

    /// `ker(T - λ)`.
    pub fn defect_subspace(&self, lambda: C64) -> Subspace {
        let bf = self.basis_first();
        let x = self.basis_second() - &bf * lambda;
        Subspace::column_space(&(bf * nullspace(&x, RTOL)), RTOL)
    }

    /// Checks `T = A0 ∔ N^_μ`: returns `(dim A0 + dim N_μ, rank of the sum)`.
    pub fn decomposition_ranks(&self, mu: C64) -> (usize, usize) {
        let bf = self.basis_first();
        let x = self.basis_second() - &bf * mu;
        let nul = nullspace(&x, RTOL);
        let defect_pairs = &self.basis * nul;
        let sum = linalg::hstack(&[self.a0.basis(), &defect_pairs]);
        (self.a0.dim() + defect_pairs.ncols(), linalg::rank(&sum, 1e-9))
    }

    /// γ(λ) and M(λ) from the bordered system `[B_f' - λ B_f; G0] c = [0; I]`.
    pub fn weyl_data(&self, lambda: C64) -> Result<WeylData> {
        self.a0.resolvent(lambda)?;
        let bf = self.basis_first();
        let s = linalg::vstack(&[&(self.basis_second() - &bf * lambda), &self.g0]);
        let mut rhs = linalg::zeros(self.p(), self.g());
        rhs.view_mut((self.n(), 0), (self.g(), self.g()))
            .copy_from(&linalg::eye(self.g()));
        let coords = linalg::solve_checked(&s, &rhs, COND_MAX)
            .map_err(|_| Error::NonInvertibleTrace(lambda))?;
        Ok(WeylData {
            lambda,
            gamma: bf * &coords,
            m: &self.g1 * coords,
        })
    }

    pub fn gamma_field(&self, lambda: C64) -> Result<Mat> {
        Ok(self.weyl_data(lambda)?.gamma)
    }

    pub fn weyl(&self, lambda: C64) -> Result<Mat> {
        Ok(self.weyl_data(lambda)?.m)
    }

    /// Adjoint `Gb^{-1} X* G` of a map from the boundary into the state.
    pub fn plus(&self, x: &Mat) -> Mat {
        &self.gb_inv * x.adjoint() * self.state.gram()
    }

    /// Whether `(Γ0; Γ1)` is onto `G x G`.
    pub fn is_ordinary(&self) -> bool {
        linalg::rank(&linalg::vstack(&[&self.g0, &self.g1]), RTOL) == 2 * self.g()
    }

    /// Residuals of the γ/M identities; the first sample serves as `λ0` and
    /// each sample is paired with its successor as `μ`.
    pub fn verify_identities(&self, samples: &[C64]) -> Result<IdentityReport> {
        let mut rep = IdentityReport::default();
        if samples.is_empty() {
            return Ok(rep);
        }
        let data: Vec<WeylData> = samples
            .iter()
            .map(|&l| self.weyl_data(l))
            .collect::<Result<_>>()?;
        let conj: Vec<WeylData> = samples
            .iter()
            .map(|&l| self.weyl_data(l.conj()))
            .collect::<Result<_>>()?;
        let n = self.n();
        let d0 = &data[0];
        let l0 = d0.lambda;
        let re_m0 = linalg::hermitian_part(&d0.m);
        let g0p = self.plus(&d0.gamma);
        for (k, d) in data.iter().enumerate() {
            let l = d.lambda;
            let dm = &data[(k + 1) % data.len()];
            let mu = dm.lambda;
            let r = self.a0.resolvent(l)?;

            let rhs1 = (linalg::eye(n) + &r * (l - mu)) * &dm.gamma;
            let scale1 = d.gamma.norm() + dm.gamma.norm() * (1.0 + (l - mu).norm() * r.norm());
            rep.gamma_shift = rep.gamma_shift.max(linalg::rel((&d.gamma - rhs1).norm(), scale1));

            let gmp = self.plus(&dm.gamma);
            let lhs2 = &d.m - dm.m.adjoint();
            let rhs2 = &gmp * &d.gamma * (l - mu.conj());
            let scale2 =
                d.m.norm() + dm.m.norm() + (l - mu.conj()).norm() * gmp.norm() * d.gamma.norm();
            rep.weyl_difference = rep.weyl_difference.max(linalg::rel((lhs2 - rhs2).norm(), scale2));

            let lhs3 = self.plus(&conj[k].gamma);
            let pairs = linalg::vstack(&[&r, &(linalg::eye(n) + &r * l)]);
            let coords = self.coordinates(&pairs);
            let rhs3 = &self.g1 * &coords;
            let scale3 = lhs3.norm() + self.g1.norm() * coords.norm();
            rep.gamma_adjoint = rep.gamma_adjoint.max(linalg::rel((lhs3 - rhs3).norm(), scale3));

            let inner = linalg::eye(n) * (l - C64::new(l0.re, 0.0)) + &r * ((l - l0) * (l - l0.conj()));
            let rhs4 = &re_m0 + &g0p * &inner * &d0.gamma;
            let scale4 = d.m.norm() + re_m0.norm() + g0p.norm() * inner.norm() * d0.gamma.norm();
            rep.weyl_representation = rep.weyl_representation.max(linalg::rel((&d.m - rhs4).norm(), scale4));
        }
        Ok(rep)
    }

    pub fn to_json(&self) -> TripleJson {
        TripleJson {
            state: self.state.to_json(),
            boundary: BoundaryJson {
                dim: self.g(),
                gram: Some(MatrixJson::from(&self.gb)),
            },
            t_basis: MatrixJson::from(&self.basis),
            g0: MatrixJson::from(&self.g0),
            g1: MatrixJson::from(&self.g1),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<MatrixJson>,
}

/// Serialized triple `{state, boundary, T-basis, G0, G1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleJson {
    pub state: KreinSpaceJson,
    pub boundary: BoundaryJson,
    #[serde(rename = "T-basis")]
    pub t_basis: MatrixJson,
    #[serde(rename = "G0")]
    pub g0: MatrixJson,
    #[serde(rename = "G1")]
    pub g1: MatrixJson,
}

impl TripleJson {
    pub fn build(&self) -> Result<BoundaryTriple> {
        let state = self.state.build()?;
        let g = self.boundary.dim;
        let gb = match &self.boundary.gram {
            Some(m) => m.to_matrix_sized(g, g)?,
            None => linalg::eye(g),
        };
        BoundaryTriple::new(
            state,
            gb,
            self.t_basis.to_matrix()?,
            self.g0.to_matrix()?,
            self.g1.to_matrix()?,
        )
    }
}
