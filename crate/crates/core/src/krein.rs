//! Finite-dimensional Krein spaces, subspaces and linear relations.
//!
//! The inner product is `<x, y> = y* G x`. Pairs in `H x H` carry the
//! indefinite product `[[f^, g^]] = i([f, g'] - [f', g])`, whose Gram matrix is
//! `K = [[0, -iG], [iG, 0]]`; adjoints are orthogonal companions under `K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::MatrixJson;
use crate::linalg::{
    self, c, column_space, column_space_scaled, nullspace, nullspace_scaled, Mat, C64, COND_MAX, RTOL,
};

/// Tolerance for relation queries (containment, symmetry).
pub const RELATION_TOL: f64 = 1e-10;

/// Finite-dimensional inner-product space with Hermitian invertible Gram `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinSpace {
    gram: Mat,
    j: Mat,
    cond: f64,
}

impl KreinSpace {
    /// Validates `G` (Hermitian, invertible) and `J` (Hermitian involution with
    /// `G J` positive definite). Without `J` a fundamental symmetry is derived
    /// from the spectral decomposition of `G`.
    pub fn new(gram: Mat, j: Option<Mat>) -> Result<Self> {
        let n = gram.nrows();
        if gram.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix must be square and nonempty, got {:?}",
                gram.shape()
            )));
        }
        if linalg::hermitian_residual(&gram) > 1e-12 {
            return Err(Error::InvalidInput("Gram matrix is not Hermitian".into()));
        }
        let gram = linalg::hermitian_part(&gram);
        let sv = linalg::singular_values(&gram);
        let cond = sv[0] / sv[n - 1];
        if !cond.is_finite() || cond > COND_MAX {
            return Err(Error::InvalidInput(format!(
                "Gram matrix is singular or ill conditioned (condition {cond:.3e})"
            )));
        }
        let j = match j {
            Some(j) => {
                if j.shape() != (n, n) {
                    return Err(Error::DimensionMismatch("J must match the Gram matrix".into()));
                }
                if linalg::hermitian_residual(&j) > 1e-12 {
                    return Err(Error::InvalidInput("J is not Hermitian".into()));
                }
                if (&j * &j - linalg::eye(n)).norm() > 1e-12 * (n as f64).sqrt() {
                    return Err(Error::InvalidInput("J is not an involution".into()));
                }
                let h = &gram * &j;
                if linalg::hermitian_residual(&h) > 1e-10 || linalg::min_eigenvalue(&h) <= 0.0 {
                    return Err(Error::InvalidInput("G J is not positive definite".into()));
                }
                j
            }
            None => linalg::hermitian_fn(&gram, |x| x.signum()),
        };
        Ok(KreinSpace { gram, j, cond })
    }

    /// Euclidean space `C^n`.
    pub fn hilbert(n: usize) -> Self {
        KreinSpace {
            gram: linalg::eye(n),
            j: linalg::eye(n),
            cond: 1.0,
        }
    }

    /// Hilbert space `C^n` with inner product `w * y* x`.
    pub fn weighted(n: usize, w: f64) -> Self {
        KreinSpace {
            gram: linalg::eye(n) * linalg::re(w),
            j: linalg::eye(n),
            cond: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn fundamental_symmetry(&self) -> &Mat {
        &self.j
    }

    pub fn condition(&self) -> f64 {
        self.cond
    }

    /// `<x, y> = y* G x`.
    pub fn inner(&self, x: &Mat, y: &Mat) -> Mat {
        y.adjoint() * &self.gram * x
    }

    /// (positive, negative) index of the Gram matrix.
    pub fn signature(&self) -> (usize, usize) {
        let (neg, pos) = linalg::inertia(&self.gram, 1e-12);
        (pos, neg)
    }

    pub fn is_hilbert(&self) -> bool {
        self.signature().1 == 0
    }

    /// Orthogonal sum with block-diagonal Gram and fundamental symmetry.
    pub fn product(&self, other: &KreinSpace) -> KreinSpace {
        KreinSpace {
            gram: linalg::block_diag(&[&self.gram, &other.gram]),
            j: linalg::block_diag(&[&self.j, &other.j]),
            cond: self.cond.max(other.cond),
        }
    }

    /// Gram matrix `K` of `[[.,.]]` on `H x H`.
    pub fn pair_gram(&self) -> Mat {
        let n = self.dim();
        let mut k = linalg::zeros(2 * n, 2 * n);
        k.view_mut((0, n), (n, n)).copy_from(&(&self.gram * c(0.0, -1.0)));
        k.view_mut((n, 0), (n, n)).copy_from(&(&self.gram * c(0.0, 1.0)));
        k
    }

    pub fn to_json(&self) -> KreinSpaceJson {
        KreinSpaceJson {
            dim: self.dim(),
            gram: Some(MatrixJson::from(&self.gram)),
            j: Some(MatrixJson::from(&self.j)),
        }
    }
}

/// Serialized form `{dim, gram?, J?}`; a missing Gram means Euclidean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KreinSpaceJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<MatrixJson>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<MatrixJson>,
}

impl KreinSpaceJson {
    pub fn build(&self) -> Result<KreinSpace> {
        let gram = match &self.gram {
            Some(g) => g.to_matrix_sized(self.dim, self.dim)?,
            None => linalg::eye(self.dim),
        };
        let j = match &self.j {
            Some(j) => Some(j.to_matrix_sized(self.dim, self.dim)?),
            None => None,
        };
        KreinSpace::new(gram, j)
    }
}

/// Subspace of `C^n` held by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
}

impl Subspace {
    /// ran `m`, orthonormalized at tolerance `rtol * sigma_max`.
    pub fn column_space(m: &Mat, rtol: f64) -> Self {
        Subspace {
            ambient: m.nrows(),
            basis: column_space(m, rtol),
        }
    }

    fn from_orthonormal(basis: Mat, ambient: usize) -> Self {
        Subspace { ambient, basis }
    }

    pub fn trivial(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: linalg::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: linalg::eye(ambient),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Mat {
        &self.basis * self.basis.adjoint()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient);
        }
        Subspace {
            ambient: self.ambient,
            basis: nullspace(&self.basis.adjoint(), RTOL),
        }
    }

    /// `||(I - P) x|| / ||x||` for the columns of `x`.
    pub fn distance_of(&self, x: &Mat) -> f64 {
        let n = x.norm();
        if n == 0.0 {
            return 0.0;
        }
        (x - &self.basis * (self.basis.adjoint() * x)).norm() / n
    }

    /// Distance between subspaces; 1 when dimensions differ.
    pub fn distance(&self, other: &Subspace) -> f64 {
        linalg::subspace_distance(&self.basis, &other.basis)
    }
}

/// `U ∩ V` from the nullspace of `[U, -V]`.
pub fn intersect(u: &Subspace, v: &Subspace) -> Result<Subspace> {
    if u.ambient != v.ambient {
        return Err(Error::DimensionMismatch(format!(
            "intersect: ambient dimensions {} and {}",
            u.ambient, v.ambient
        )));
    }
    if u.dim() == 0 || v.dim() == 0 {
        return Ok(Subspace::trivial(u.ambient));
    }
    let stacked = linalg::hstack(&[&u.basis, &(-&v.basis)]);
    let null = nullspace(&stacked, 1e-8);
    let coeff = null.rows(0, u.dim()).into_owned();
    Ok(Subspace::column_space(&(&u.basis * coeff), RTOL))
}

/// Canonical subspaces of a relation.
#[derive(Debug, Clone)]
pub struct RelationParts {
    pub dom: Subspace,
    pub ran: Subspace,
    pub ker: Subspace,
    pub mul: Subspace,
}

/// Subspace of `H x H` spanned by the columns of a `2n x k` basis.
#[derive(Debug, Clone)]
pub struct LinearRelation {
    space: KreinSpace,
    basis: Mat,
}

impl LinearRelation {
    /// Orthonormalizes `basis`; dependent columns are dropped.
    pub fn new(space: KreinSpace, basis: &Mat) -> Result<Self> {
        if basis.nrows() != 2 * space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "relation basis has {} rows, expected {}",
                basis.nrows(),
                2 * space.dim()
            )));
        }
        let basis = column_space(basis, RTOL);
        Ok(LinearRelation { space, basis })
    }

    /// Graph `{x, A x}` of a square matrix.
    pub fn graph(space: KreinSpace, a: &Mat) -> Result<Self> {
        let n = space.dim();
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch("operator must be n x n".into()));
        }
        Self::new(space, &linalg::vstack(&[&linalg::eye(n), a]))
    }

    pub fn space(&self) -> &KreinSpace {
        &self.space
    }

    /// Orthonormal `2n x k` basis.
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.space.dim()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// First components `F` of the basis.
    pub fn first(&self) -> Mat {
        self.basis.rows(0, self.n()).into_owned()
    }

    /// Second components `F'` of the basis.
    pub fn second(&self) -> Mat {
        self.basis.rows(self.n(), self.n()).into_owned()
    }

    /// `A+ = ker(W* K)`, the orthogonal companion under `[[.,.]]`.
    pub fn adjoint(&self) -> LinearRelation {
        let k = self.space.pair_gram();
        let wk = self.basis.adjoint() * k;
        LinearRelation {
            space: self.space.clone(),
            basis: nullspace(&wk, RTOL),
        }
    }

    /// `||W* K W|| / ||K||`: zero exactly when the relation is symmetric.
    fn symmetry_residual(&self) -> f64 {
        let k = self.space.pair_gram();
        (self.basis.adjoint() * &k * &self.basis).norm() / k.norm()
    }

    /// `A ⊆ A+`, with the containment residual.
    pub fn is_symmetric(&self) -> (bool, f64) {
        let r = self.symmetry_residual();
        (r <= RELATION_TOL, r)
    }

    /// `A = A+`: symmetric and of dimension `n`.
    pub fn is_selfadjoint(&self) -> (bool, f64) {
        let r = self.symmetry_residual();
        let r = if self.dim() == self.n() { r } else { r.max(1.0) };
        (r <= RELATION_TOL, r)
    }

    /// Distance between the spans of two relations.
    pub fn distance(&self, other: &LinearRelation) -> f64 {
        linalg::subspace_distance(&self.basis, &other.basis)
    }

    /// `(A - λ)^{-1}` as an `n x n` matrix.
    pub fn resolvent(&self, lambda: C64) -> Result<Mat> {
        let n = self.n();
        if self.dim() != n {
            return Err(Error::SpectrumPoint {
                lambda,
                cond: f64::INFINITY,
            });
        }
        let f = self.first();
        let x = self.second() - &f * lambda;
        match linalg::inverse_checked(&x, COND_MAX) {
            Ok(xinv) => Ok(f * xinv),
            Err(cond) => Err(Error::SpectrumPoint { lambda, cond }),
        }
    }

    /// `ker(A - λ)` as a subspace of `H`.
    pub fn eigenspace(&self, lambda: C64) -> Subspace {
        let f = self.first();
        let x = self.second() - &f * lambda;
        let scale = 1.0 + lambda.norm();
        let k = nullspace_scaled(&x, RTOL, scale);
        Subspace::from_orthonormal(column_space_scaled(&(f * k), RTOL, 1.0), self.n())
    }

    /// dom, ran, ker and mul; thresholds are taken relative to the
    /// orthonormal basis, so exactly vanishing components stay trivial.
    pub fn parts(&self) -> RelationParts {
        let f = self.first();
        let fp = self.second();
        let n = self.n();
        let span = |m: &Mat| Subspace::from_orthonormal(column_space_scaled(m, RTOL, 1.0), n);
        RelationParts {
            dom: span(&f),
            ran: span(&fp),
            ker: span(&(&f * nullspace_scaled(&fp, RTOL, 1.0))),
            mul: span(&(&fp * nullspace_scaled(&f, RTOL, 1.0))),
        }
    }

    /// Eigenvalues of a relation with nonempty resolvent set, from the
    /// spectrum of `(A - ζ)^{-1}` mapped through `λ = ζ + 1/μ`.
    pub fn eigenvalues(&self, zeta: C64) -> Result<Vec<C64>> {
        let r = self.resolvent(zeta)?;
        if r.nrows() == 0 {
            return Ok(vec![]);
        }
        let scale = r.norm().max(f64::MIN_POSITIVE);
        let schur = nalgebra::Schur::new(r);
        let ev = schur.eigenvalues().expect("complex Schur form is triangular");
        Ok(ev
            .iter()
            .filter(|mu| mu.norm() > 1e-10 * scale)
            .map(|mu| zeta + C64::new(1.0, 0.0) / mu)
            .collect())
    }
}
