//! Solving `(ℓ - λ) f = g`, `τ(λ) y = w L_BI f_D` for the discrete elliptic
//! problem: a direct coupled solve, the Krein resolvent formula, and
//! linearizations `Ã` whose compressed resolvent reproduces the solution.
//!
//! The homogeneous problem is scanned through `M(λ) + τ(λ)` on a real window
//! and compared with the eigenvalues of `Ã`.

use rayon::prelude::*;

use crate::elliptic::EllipticTriple;
use crate::error::{Error, Result};
use crate::linalg::{self, re, Mat, Vector, C64, COND_MAX};
use crate::opfunc::{MatrixFunction, OperatorFunction, RationalNevanlinna};
use crate::triple::BoundaryTriple;

/// `λ ∈ U` when `σ_min(M + τ) > U_RTOL ||M + τ||`.
pub const U_RTOL: f64 = 1e-8;

fn col(v: &Vector) -> Mat {
    Mat::from_column_slice(v.len(), 1, v.as_slice())
}

fn vec_of(m: &Mat) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

/// `M(λ) + τ(λ)`; a pole of τ is reported as `OutsideU`.
pub fn coupling_matrix(et: &EllipticTriple, tau: &dyn MatrixFunction, lambda: C64) -> Result<Mat> {
    let t = tau.eval(lambda).map_err(|e| match e {
        Error::PoleOrSpectrum(_) | Error::SpectrumPoint { .. } => Error::OutsideU {
            lambda,
            sigma_min: 0.0,
        },
        e => e,
    })?;
    if t.shape() != (et.discretization().n_boundary(), et.discretization().n_boundary()) {
        return Err(Error::DimensionMismatch(format!(
            "tau has size {:?}, the boundary has {} nodes",
            t.shape(),
            et.discretization().n_boundary()
        )));
    }
    Ok(et.weyl(lambda)? + t)
}

/// Membership of λ in the solvability set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub lambda: C64,
    pub in_u: bool,
    /// `σ_min(M(λ) + τ(λ))`, zero at a pole of τ.
    pub sigma_min: f64,
    /// `||M(λ) + τ(λ)||_2`.
    pub norm: f64,
}

impl Membership {
    pub fn relative_sigma_min(&self) -> f64 {
        linalg::rel(self.sigma_min, self.norm)
    }
}

pub fn membership(et: &EllipticTriple, tau: &dyn MatrixFunction, lambda: C64) -> Result<Membership> {
    match coupling_matrix(et, tau, lambda) {
        Ok(m) => {
            let sv = linalg::singular_values(&m);
            let norm = sv.first().cloned().unwrap_or(0.0);
            let sigma_min = sv.last().cloned().unwrap_or(0.0);
            Ok(Membership {
                lambda,
                in_u: sigma_min > U_RTOL * norm,
                sigma_min,
                norm,
            })
        }
        Err(Error::OutsideU { .. }) => Ok(Membership {
            lambda,
            in_u: false,
            sigma_min: 0.0,
            norm: f64::INFINITY,
        }),
        Err(e) => Err(e),
    }
}

/// Solution with its parameters `f = f_D + E_η y` and the residuals of the
/// two defining equations.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub lambda: C64,
    pub in_u: bool,
    pub f: Vector,
    pub f_d: Vector,
    pub y: Vector,
    /// `||T_D f_D + η E y - λ f - g|| / ||g||`.
    pub pde_residual: f64,
    /// `||τ(λ) y - w L_BI f_D||`, relative to the two terms.
    pub bc_residual: f64,
    pub sigma_min: f64,
}

fn residuals(et: &EllipticTriple, tau_l: &Mat, lambda: C64, g: &Mat, f_d: &Mat, y: &Mat) -> (f64, f64) {
    let (f, image) = et.pair(f_d, y);
    let pde = linalg::rel((image - &f * lambda - g).norm(), g.norm());
    let ty = tau_l * y;
    let flux = et.l_bi() * f_d * re(et.weight());
    let bc = linalg::rel((&ty - &flux).norm(), ty.norm() + flux.norm());
    (pde, bc)
}

/// Solves `[[T_D - λ, (η - λ) E], [-w L_BI, τ(λ)]] (f_D, y) = (g, 0)` and
/// returns `f = f_D + E y`. Independent of γ and M.
pub fn direct_solve(et: &EllipticTriple, tau: &dyn MatrixFunction, lambda: C64, g: &Vector) -> Result<Vector> {
    Ok(direct_solve_parts(et, tau, lambda, g)?.f)
}

/// [`direct_solve`] with parameters and residuals.
pub fn direct_solve_parts(et: &EllipticTriple, tau: &dyn MatrixFunction, lambda: C64, g: &Vector) -> Result<SolveReport> {
    let de = et.discretization();
    let (n_i, n_b) = (de.n_interior(), de.n_boundary());
    if g.len() != n_i {
        return Err(Error::DimensionMismatch(format!("right-hand side has length {}, expected {n_i}", g.len())));
    }
    let tau_l = tau.eval(lambda)?;
    let top = linalg::hstack(&[
        &(et.td() - linalg::eye(n_i) * lambda),
        &(et.extension() * (re(et.eta()) - lambda)),
    ]);
    let bottom = linalg::hstack(&[&(et.l_bi() * re(-et.weight())), &tau_l]);
    let a = linalg::vstack(&[&top, &bottom]);
    let gm = col(g);
    let rhs = linalg::vstack(&[&gm, &linalg::zeros(n_b, 1)]);
    let x = linalg::solve_checked(&a, &rhs, COND_MAX).map_err(|_| Error::SingularSystem(lambda))?;
    let f_d = x.rows(0, n_i).into_owned();
    let y = x.rows(n_i, n_b).into_owned();
    let (pde, bc) = residuals(et, &tau_l, lambda, &gm, &f_d, &y);
    let f = &f_d + et.extension() * &y;
    Ok(SolveReport {
        lambda,
        in_u: true,
        f: vec_of(&f),
        f_d: vec_of(&f_d),
        y: vec_of(&y),
        pde_residual: pde,
        bc_residual: bc,
        sigma_min: f64::NAN,
    })
}

/// Krein's formula
/// `f = (T_D - λ)^{-1} g - γ(λ) (M(λ) + τ(λ))^{-1} γ(conj λ)+ g`,
/// with `γ(conj λ)+ = w γ(conj λ)*`.
pub fn krein_resolve(et: &EllipticTriple, tau: &dyn MatrixFunction, lambda: C64, g: &Vector) -> Result<SolveReport> {
    let n_i = et.discretization().n_interior();
    if g.len() != n_i {
        return Err(Error::DimensionMismatch(format!("right-hand side has length {}, expected {n_i}", g.len())));
    }
    let gm = col(g);
    let rg = et.dirichlet_solve(lambda, &gm)?;
    let gamma = et.gamma(lambda)?;
    let gamma_bar = et.gamma(lambda.conj())?;
    let mt = coupling_matrix(et, tau, lambda)?;
    let sv = linalg::singular_values(&mt);
    let sigma_min = sv.last().cloned().unwrap_or(0.0);
    if sigma_min <= U_RTOL * sv.first().cloned().unwrap_or(0.0) {
        return Err(Error::OutsideU { lambda, sigma_min });
    }
    let rhs = gamma_bar.adjoint() * &gm * re(et.weight());
    let y = -mt.lu().solve(&rhs).ok_or(Error::OutsideU { lambda, sigma_min })?;
    let f = rg + &gamma * &y;
    let f_d = &f - et.extension() * &y;
    let tau_l = tau.eval(lambda)?;
    let (pde, bc) = residuals(et, &tau_l, lambda, &gm, &f_d, &y);
    Ok(SolveReport {
        lambda,
        in_u: true,
        f: vec_of(&f),
        f_d: vec_of(&f_d),
        y: vec_of(&y),
        pde_residual: pde,
        bc_residual: bc,
        sigma_min,
    })
}

/// Membership at every probe; for Nevanlinna τ all nonreal probes should
/// lie in the solvability set.
pub fn solvability_probe(et: &EllipticTriple, tau: &dyn MatrixFunction, probes: &[C64]) -> Result<Vec<Membership>> {
    probes.par_iter().map(|&l| membership(et, tau, l)).collect()
}

/// An eigenvalue of `Ã` with a right eigenvector.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: C64,
    pub vector: Vector,
}

/// `Ã` on `C^{n_I} x C^{n_K}` with the product Gram `W = diag(w I, G_K)`.
#[derive(Debug, Clone)]
pub struct Linearization {
    matrix: Mat,
    gram: Mat,
    n_interior: usize,
    hilbert: bool,
}

impl Linearization {
    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Dimension of the realization state.
    pub fn n_state(&self) -> usize {
        self.matrix.nrows() - self.n_interior
    }

    /// Whether `W` is positive definite.
    pub fn is_hilbert(&self) -> bool {
        self.hilbert
    }

    /// `||W Ã - Ã* W|| / ||W Ã||`.
    pub fn w_symmetry_residual(&self) -> f64 {
        let wa = &self.gram * &self.matrix;
        linalg::rel((&wa - wa.adjoint()).norm(), wa.norm())
    }

    /// `W^{1/2} Ã W^{-1/2}` in the Hilbert case.
    pub fn symmetrized(&self) -> Option<Mat> {
        if !self.hilbert {
            return None;
        }
        let half = linalg::hermitian_fn(&self.gram, f64::sqrt);
        let inv_half = linalg::pd_inv_sqrt(&self.gram);
        Some(half * &self.matrix * inv_half)
    }

    /// Largest `|Im λ|` over the eigenvalues of the symmetrized matrix, from
    /// a general (non-Hermitian) eigensolver.
    pub fn symmetrized_max_imag(&self) -> Option<f64> {
        let s = self.symmetrized()?;
        let ev = nalgebra::Schur::new(s).eigenvalues().expect("complex Schur form is triangular");
        Some(ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max))
    }

    /// Eigenpairs sorted by real part: Hermitian eigensolver on the
    /// symmetrized matrix in the Hilbert case, complex Schur form with
    /// singular-vector eigenvectors otherwise.
    pub fn eigenpairs(&self) -> Vec<Eigenpair> {
        let mut out = if let Some(s) = self.symmetrized() {
            let inv_half = linalg::pd_inv_sqrt(&self.gram);
            let (vals, vecs) = linalg::hermitian_eigen(&s);
            vals.iter()
                .enumerate()
                .map(|(k, &l)| Eigenpair {
                    lambda: re(l),
                    vector: &inv_half * vecs.column(k),
                })
                .collect::<Vec<_>>()
        } else {
            let ev = nalgebra::Schur::new(self.matrix.clone())
                .eigenvalues()
                .expect("complex Schur form is triangular");
            let n = self.matrix.nrows();
            ev.iter()
                .map(|&l| {
                    let svd = (&self.matrix - linalg::eye(n) * l).svd(false, true);
                    let vt = svd.v_t.expect("requested");
                    let k = svd
                        .singular_values
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .map(|(k, _)| k)
                        .unwrap_or(0);
                    Eigenpair {
                        lambda: l,
                        vector: vt.row(k).adjoint(),
                    }
                })
                .collect()
        };
        out.sort_by(|a, b| {
            a.lambda
                .re
                .partial_cmp(&b.lambda.re)
                .unwrap()
                .then(a.lambda.im.partial_cmp(&b.lambda.im).unwrap())
        });
        out
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.eigenpairs().into_iter().map(|p| p.lambda).collect()
    }

    /// Interior block of `(Ã - λ)^{-1} (g, 0)`.
    pub fn compressed_resolvent(&self, lambda: C64, g: &Vector) -> Result<Vector> {
        let n = self.matrix.nrows();
        if g.len() != self.n_interior {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, expected {}",
                g.len(),
                self.n_interior
            )));
        }
        let mut rhs = linalg::zeros(n, 1);
        rhs.view_mut((0, 0), (self.n_interior, 1)).copy_from(&col(g));
        let x = linalg::solve_checked(&(&self.matrix - linalg::eye(n) * lambda), &rhs, COND_MAX)
            .map_err(|cond| Error::SpectrumPoint { lambda, cond })?;
        Ok(vec_of(&x.rows(0, self.n_interior).into_owned()))
    }
}

/// Couples the elliptic triple with a realization `{K, Γ0, Γ1}` of τ
/// through `Υ0 f = Γ0 k`, `Υ1 f + Γ1 k = 0`.
///
/// With realization coordinates `c`, `f = f_D + E Γ0 c` and `k = B_f c`;
/// the second condition gives `Q c = (w L_BI f, k)` with
/// `Q = [Γ1 + w L_BI E Γ0; B_f]`, and then
/// `Ã (f, k) = (T_D f + L_IB Γ0 c, B_f' c)`.
pub fn build_linearization(et: &EllipticTriple, realized: &BoundaryTriple) -> Result<Linearization> {
    let de = et.discretization();
    let (n_i, n_b) = (de.n_interior(), de.n_boundary());
    if realized.g() != n_b {
        return Err(Error::DimensionMismatch(format!(
            "realization has boundary dimension {}, the problem has {n_b}",
            realized.g()
        )));
    }
    if (realized.boundary_gram() - linalg::eye(n_b)).norm() > 1e-12 {
        return Err(Error::InvalidInput("realization must use the Euclidean boundary inner product".into()));
    }
    let n_k = realized.n();
    let w = re(et.weight());
    let wl_bi = et.l_bi() * w;
    let bk_f = realized.basis_first();
    let bk_fp = realized.basis_second();
    let q = linalg::vstack(&[
        &(realized.g1() + &wl_bi * et.extension() * realized.g0()),
        &bk_f,
    ]);
    let q_inv = linalg::inverse_checked(&q, COND_MAX).map_err(|_| Error::CouplingRankDeficient)?;
    let left = linalg::vstack(&[&(de.l_ib() * realized.g0()), &bk_fp]);
    let right = linalg::block_diag(&[&wl_bi, &linalg::eye(n_k)]);
    let base = linalg::block_diag(&[et.td(), &linalg::zeros(n_k, n_k)]);
    let matrix = base + left * q_inv * right;
    let gram = linalg::block_diag(&[&(linalg::eye(n_i) * w), realized.state().gram()]);
    Ok(Linearization {
        matrix,
        gram,
        n_interior: n_i,
        hilbert: realized.state().is_hilbert(),
    })
}

/// Explicit block operator for rational τ with `β1 > 0` on
/// `C^{n_I} x (C^{n_B})^m`, `P = β1^{-1/2}`:
///
/// ```text
/// f'   = T_D f + L_IB P k1
/// k1'  = P w L_BI f - P (w L_BI E + α1) P k1 + Σ P βi^{1/2} ki
/// ki'  = βi^{1/2} P k1 + αi ki
/// ```
pub fn build_linearization_rational(et: &EllipticTriple, tau: &RationalNevanlinna) -> Result<Linearization> {
    let p = tau.beta1_inv_sqrt()?;
    let de = et.discretization();
    let (n_i, n_b) = (de.n_interior(), de.n_boundary());
    if tau.dim() != n_b {
        return Err(Error::DimensionMismatch(format!("tau has size {}, the boundary has {n_b} nodes", tau.dim())));
    }
    let m = tau.m();
    let n = n_i + m * n_b;
    let w = re(et.weight());
    let wl_bi = et.l_bi() * w;
    let mut a = linalg::zeros(n, n);
    a.view_mut((0, 0), (n_i, n_i)).copy_from(et.td());
    a.view_mut((0, n_i), (n_i, n_b)).copy_from(&(de.l_ib() * &p));
    a.view_mut((n_i, 0), (n_b, n_i)).copy_from(&(&p * &wl_bi));
    a.view_mut((n_i, n_i), (n_b, n_b))
        .copy_from(&(-(&p * (&wl_bi * et.extension() + &tau.alpha()[0]) * &p)));
    for i in 1..m {
        let o = n_i + i * n_b;
        let bs = &tau.beta_sqrt()[i];
        a.view_mut((n_i, o), (n_b, n_b)).copy_from(&(&p * bs));
        a.view_mut((o, n_i), (n_b, n_b)).copy_from(&(bs * &p));
        a.view_mut((o, o), (n_b, n_b)).copy_from(&tau.alpha()[i]);
    }
    let gram = linalg::block_diag(&[&(linalg::eye(n_i) * w), &linalg::eye(m * n_b)]);
    Ok(Linearization {
        matrix: a,
        gram,
        n_interior: n_i,
        hilbert: true,
    })
}

/// The selfadjoint extension for a constant `τ = Θ` on `C^{n_I}` alone:
/// `y = (Θ + w L_BI E)^{-1} w L_BI f` and `T_Θ f = T_D f + L_IB y`.
pub fn fixed_extension(et: &EllipticTriple, theta: &Mat) -> Result<Linearization> {
    let de = et.discretization();
    let (n_i, n_b) = (de.n_interior(), de.n_boundary());
    if theta.shape() != (n_b, n_b) {
        return Err(Error::DimensionMismatch(format!("theta has size {:?}, the boundary has {n_b} nodes", theta.shape())));
    }
    let wl_bi = et.l_bi() * re(et.weight());
    let k = linalg::inverse_checked(&(theta + &wl_bi * et.extension()), COND_MAX)
        .map_err(|_| Error::CouplingRankDeficient)?;
    Ok(Linearization {
        matrix: et.td() + de.l_ib() * k * wl_bi,
        gram: linalg::eye(n_i) * re(et.weight()),
        n_interior: n_i,
        hilbert: true,
    })
}

/// Linearization for any supported τ: the explicit block operator for
/// rational τ with `β1 > 0`, otherwise the coupling with a realization.
pub fn linearize(et: &EllipticTriple, tau: &OperatorFunction, realized: Option<&BoundaryTriple>) -> Result<Linearization> {
    if let OperatorFunction::Rational(r) = tau {
        match build_linearization_rational(et, r) {
            Err(Error::BetaOneSingular(_)) => {}
            other => return other,
        }
    }
    match realized {
        Some(t) => build_linearization(et, t),
        None => Err(Error::InvalidInput("a realization of tau is required".into())),
    }
}

/// One evaluated point of a real scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub lambda: f64,
    /// `σ_min(M + τ) / ||M + τ||`.
    pub sigma_min: f64,
    /// Negative eigenvalues of `M(λ) + τ(λ)`, Hermitian at real λ.
    pub negative: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Scan {
    /// Roots of `det(M + τ)` in the window, ascending.
    pub roots: Vec<f64>,
    /// Grid samples, ascending.
    pub samples: Vec<ScanPoint>,
    /// Points of `σ(T_D)` and poles of τ inside the window; the scan
    /// stops short of each by a relative `1e-9`.
    pub excluded: Vec<f64>,
}

/// `M(λ)` at real λ from one eigendecomposition `T_D = V D V*`:
/// `w (η - λ) L_BI V (D - λ)^{-1} V* E_η`.
struct RealWeyl {
    d: Vec<f64>,
    left: Mat,
    right: Mat,
    w: f64,
    eta: f64,
}

impl RealWeyl {
    fn new(et: &EllipticTriple) -> Self {
        let (d, v) = linalg::hermitian_eigen(et.td());
        RealWeyl {
            left: et.l_bi() * &v,
            right: v.adjoint() * et.extension(),
            d,
            w: et.weight(),
            eta: et.eta(),
        }
    }

    fn eval(&self, lambda: f64) -> Mat {
        let mut scaled = self.right.clone();
        for (k, mut row) in scaled.row_iter_mut().enumerate() {
            row *= re(1.0 / (self.d[k] - lambda));
        }
        &self.left * scaled * re(self.w * (self.eta - lambda))
    }
}

fn scan_point(rw: &RealWeyl, tau: &dyn MatrixFunction, lambda: f64) -> Option<ScanPoint> {
    let m = rw.eval(lambda) + tau.eval(re(lambda)).ok()?;
    let h = linalg::hermitian_part(&m);
    let ev = linalg::hermitian_eigenvalues(&h);
    let norm = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let smin = ev.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    Some(ScanPoint {
        lambda,
        sigma_min: linalg::rel(smin, norm),
        negative: ev.iter().filter(|&&x| x < 0.0).count(),
    })
}

fn bisect(
    rw: &RealWeyl,
    tau: &dyn MatrixFunction,
    lo: ScanPoint,
    hi: ScanPoint,
    out: &mut Vec<f64>,
) {
    if lo.negative == hi.negative {
        return;
    }
    if hi.lambda - lo.lambda <= 1e-12 * lo.lambda.abs().max(1.0) {
        out.push(0.5 * (lo.lambda + hi.lambda));
        return;
    }
    let mid = 0.5 * (lo.lambda + hi.lambda);
    match scan_point(rw, tau, mid) {
        Some(m) => {
            bisect(rw, tau, lo, m, out);
            bisect(rw, tau, m, hi, out);
        }
        None => out.push(mid),
    }
}

fn golden_min(rw: &RealWeyl, tau: &dyn MatrixFunction, mut a: f64, mut b: f64) -> Option<ScanPoint> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = scan_point(rw, tau, x1)?;
    let mut f2 = scan_point(rw, tau, x2)?;
    while b - a > 1e-12 * a.abs().max(1.0) {
        if f1.sigma_min < f2.sigma_min {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = scan_point(rw, tau, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = scan_point(rw, tau, x2)?;
        }
    }
    Some(if f1.sigma_min < f2.sigma_min { f1 } else { f2 })
}

/// Roots of `M(λ) + τ(λ)` on a real window.
///
/// The window is split at `σ(T_D)` and the poles of τ. On each piece the
/// number of negative eigenvalues of `M + τ` is sampled on the grid and
/// every change is bisected to a relative `1e-12`; local minima of
/// `σ_min / ||M + τ||` on the grid are refined by golden section to catch
/// roots without a sign change.
pub fn homogeneous_scan(et: &EllipticTriple, tau: &dyn MatrixFunction, window: [f64; 2], grid: usize) -> Scan {
    let [a, b] = window;
    let grid = grid.max(2);
    let rw = RealWeyl::new(et);
    let mut breaks: Vec<f64> = rw
        .d
        .iter()
        .cloned()
        .chain(tau.poles())
        .filter(|&p| p > a && p < b)
        .collect();
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1.0));
    let delta = |p: f64| 1e-9 * p.abs().max(1.0);
    let mut edges = vec![(a, b)];
    for &p in &breaks {
        let (lo, hi) = edges.pop().expect("nonempty");
        edges.push((lo, p - delta(p)));
        edges.push((p + delta(p), hi));
    }
    let step = (b - a) / (grid - 1) as f64;
    let pieces: Vec<Vec<f64>> = edges
        .iter()
        .filter(|(lo, hi)| hi > lo)
        .map(|&(lo, hi)| {
            let mut pts = vec![lo];
            pts.extend((0..grid).map(|k| a + k as f64 * step).filter(|&x| x > lo && x < hi));
            pts.push(hi);
            pts
        })
        .collect();
    let evaluated: Vec<Vec<ScanPoint>> = pieces
        .par_iter()
        .map(|pts| pts.iter().filter_map(|&x| scan_point(&rw, tau, x)).collect())
        .collect();
    let roots_per_piece: Vec<Vec<f64>> = evaluated
        .par_iter()
        .map(|pts| {
            let mut roots = vec![];
            for w in pts.windows(2) {
                bisect(&rw, tau, w[0], w[1], &mut roots);
            }
            for w in pts.windows(3) {
                if w[1].sigma_min < w[0].sigma_min && w[1].sigma_min < w[2].sigma_min {
                    if let Some(m) = golden_min(&rw, tau, w[0].lambda, w[2].lambda) {
                        let tol = 1e-6 * m.lambda.abs().max(1.0);
                        if m.sigma_min <= U_RTOL && !roots.iter().any(|r: &f64| (r - m.lambda).abs() <= tol) {
                            roots.push(m.lambda);
                        }
                    }
                }
            }
            roots
        })
        .collect();
    let mut roots: Vec<f64> = roots_per_piece.into_iter().flatten().collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Scan {
        roots,
        samples: evaluated.into_iter().flatten().collect(),
        excluded: breaks,
    }
}

/// Per-eigenvalue checks of the correspondence between `ker(Ã - λ)` and
/// the homogeneous problem.
#[derive(Debug, Clone)]
pub struct EigenCheck {
    pub lambda: C64,
    /// `||f||_w / ||(f, k)||_W`.
    pub interior_fraction: f64,
    pub pde_residual: f64,
    pub bc_residual: f64,
    /// `σ_min(M + τ) / ||M + τ||` at `Re λ`.
    pub sigma_min: f64,
    /// Distance to the nearest scan root.
    pub root_distance: f64,
}

#[derive(Debug, Clone)]
pub struct Correspondence {
    pub checks: Vec<EigenCheck>,
    /// Scan roots with no eigenvalue of `Ã` within the tolerance.
    pub unmatched_roots: Vec<f64>,
    pub tol: f64,
}

impl Correspondence {
    pub fn failures(&self) -> Vec<String> {
        let mut out = vec![];
        for c in &self.checks {
            if c.interior_fraction <= 1e-8 {
                out.push(format!("eigenvalue {} has a vanishing interior component", c.lambda));
            }
            if c.pde_residual > self.tol || c.bc_residual > self.tol {
                out.push(format!(
                    "eigenvalue {}: residuals {:.2e} (equation), {:.2e} (boundary condition)",
                    c.lambda, c.pde_residual, c.bc_residual
                ));
            }
            if c.root_distance > self.tol {
                out.push(format!("eigenvalue {} matches no scan root ({:.2e})", c.lambda, c.root_distance));
            }
        }
        for r in &self.unmatched_roots {
            out.push(format!("scan root {r} matches no eigenvalue"));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Eigenvalues of `Ã` with real part in the window and negligible imaginary
/// part.
pub fn window_eigenpairs(lin: &Linearization, window: [f64; 2]) -> Vec<Eigenpair> {
    lin.eigenpairs()
        .into_iter()
        .filter(|p| {
            p.lambda.re >= window[0]
                && p.lambda.re <= window[1]
                && p.lambda.im.abs() <= 1e-8 * p.lambda.norm().max(1.0)
        })
        .collect()
}

/// Checks both directions of the correspondence: every eigenvector of `Ã`
/// in the window has a nonzero interior part solving the homogeneous
/// problem, and every scan root is an eigenvalue of `Ã`.
pub fn eigen_correspondence(
    lin: &Linearization,
    et: &EllipticTriple,
    tau: &dyn MatrixFunction,
    window: [f64; 2],
    roots: &[f64],
    tol: f64,
) -> Result<Correspondence> {
    let n_i = lin.n_interior();
    let pairs = window_eigenpairs(lin, window);
    let checks = pairs
        .par_iter()
        .map(|p| {
            let l = re(p.lambda.re);
            let v = col(&p.vector);
            let f = v.rows(0, n_i).into_owned();
            let total = (v.adjoint() * lin.gram() * &v)[(0, 0)].re.abs().sqrt();
            let interior = f.norm() * et.weight().sqrt();
            let (f_d, y) = et.recover(&f, &(&f * l))?;
            let lhs = &f * l - et.td() * &f;
            let pde = linalg::rel(
                (&lhs - et.discretization().l_ib() * &y).norm(),
                l.norm() * f.norm() + (et.td() * &f).norm(),
            );
            let sigma_min = match coupling_matrix(et, tau, l) {
                Ok(m) => {
                    let sv = linalg::singular_values(&m);
                    linalg::rel(*sv.last().unwrap_or(&0.0), *sv.first().unwrap_or(&0.0))
                }
                Err(_) => f64::NAN,
            };
            let bc = match tau.eval(l) {
                Ok(t) => {
                    let ty = t * &y;
                    let flux = et.l_bi() * &f_d * re(et.weight());
                    linalg::rel((&ty - &flux).norm(), ty.norm() + flux.norm())
                }
                Err(_) => f64::INFINITY,
            };
            let root_distance = roots
                .iter()
                .map(|r| (r - p.lambda.re).abs())
                .fold(f64::INFINITY, f64::min);
            Ok(EigenCheck {
                lambda: p.lambda,
                interior_fraction: linalg::rel(interior, total),
                pde_residual: pde,
                bc_residual: bc,
                sigma_min,
                root_distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let unmatched_roots = roots
        .iter()
        .filter(|r| !pairs.iter().any(|p| (p.lambda.re - **r).abs() <= tol))
        .cloned()
        .collect();
    Ok(Correspondence {
        checks,
        unmatched_roots,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{build_1d, elliptic_triple};
    use crate::linalg::c;
    use crate::opfunc::ConstantFunction;
    use crate::realize::{realize, realize_constant, realize_rational, RealizeOptions};
    use rand::Rng;

    fn problem_1d(n: usize) -> EllipticTriple {
        elliptic_triple(&build_1d(n, &1.0.into(), &0.0.into(), [0.0, 1.0]).unwrap(), None).unwrap()
    }

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_iterator(v.len(), v.iter().map(|&x| re(x))))
    }

    fn lambda_linear() -> RationalNevanlinna {
        RationalNevanlinna::new(vec![linalg::zeros(2, 2)], vec![linalg::eye(2)]).unwrap()
    }

    fn rational_m2() -> RationalNevanlinna {
        RationalNevanlinna::new(vec![linalg::zeros(2, 2), diag(&[25.0, 30.0])], vec![linalg::eye(2), diag(&[5.0, 3.0])]).unwrap()
    }

    fn relerr(a: &Vector, b: &Vector) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn lambda_linear_oracles_agree() {
        let et = problem_1d(99);
        let tau = lambda_linear();
        let mut rng = linalg::rng(11);
        let g = linalg::random_vector(&mut rng, 99);
        let l = c(1.0, 1.0);
        let d = direct_solve(&et, &tau, l, &g).unwrap();
        let k = krein_resolve(&et, &tau, l, &g).unwrap();
        assert!(relerr(&k.f, &d) < 1e-10);
        assert!(k.pde_residual < 1e-10 && k.bc_residual < 1e-10);
        let lin = build_linearization_rational(&et, &tau).unwrap();
        assert!(lin.w_symmetry_residual() < 1e-12);
        assert!(relerr(&lin.compressed_resolvent(l, &g).unwrap(), &d) < 1e-10);
        let general = build_linearization(&et, &realize_rational(&tau).unwrap()).unwrap();
        assert!((general.matrix() - lin.matrix()).norm() < 1e-10 * lin.matrix().norm());
    }

    #[test]
    fn homogeneous_uniqueness() {
        let et = problem_1d(20);
        let tau = rational_m2();
        let z = Vector::zeros(20);
        assert!(direct_solve(&et, &tau, c(3.0, 0.7), &z).unwrap().norm() == 0.0);
        assert!(krein_resolve(&et, &tau, c(3.0, 0.7), &z).unwrap().f.norm() == 0.0);
        // adding a defect element breaks the boundary condition
        let mut rng = linalg::rng(2);
        let g = linalg::random_vector(&mut rng, 20);
        let l = c(-1.0, 0.4);
        let r = krein_resolve(&et, &tau, l, &g).unwrap();
        let gamma = et.gamma(l).unwrap();
        let x = linalg::random_matrix(&mut rng, 2, 1);
        let y2 = col(&r.y) + &x;
        let bc = tau.eval(l).unwrap() * &y2 - et.l_bi() * col(&r.f_d) * re(et.weight());
        let fd_shift = &gamma * &x - et.extension() * &x;
        let bc = bc - et.l_bi() * fd_shift * re(et.weight());
        assert!(bc.norm() > 1e-6 * x.norm());
    }

    #[test]
    fn constant_tau_agreement() {
        let et = problem_1d(40);
        let theta = Mat::from_row_slice(2, 2, &[re(2.0), re(0.5), re(0.5), re(-1.0)]);
        let tau = ConstantFunction::new(theta.clone()).unwrap();
        let realized = realize_constant(&theta, c(0.0, 50.0)).unwrap();
        let lin = build_linearization(&et, &realized).unwrap();
        assert!(!lin.is_hilbert());
        assert!(lin.w_symmetry_residual() < 1e-10);
        let fixed = fixed_extension(&et, &theta).unwrap();
        assert!(fixed.w_symmetry_residual() < 1e-12);
        let mut rng = linalg::rng(3);
        for l in [c(1.0, 2.0), c(-5.0, -0.1), c(100.0, 3.0)] {
            let g = linalg::random_vector(&mut rng, 40);
            let d = direct_solve(&et, &tau, l, &g).unwrap();
            assert!(relerr(&krein_resolve(&et, &tau, l, &g).unwrap().f, &d) < 1e-10);
            assert!(relerr(&lin.compressed_resolvent(l, &g).unwrap(), &d) < 1e-10);
            assert!(relerr(&fixed.compressed_resolvent(l, &g).unwrap(), &d) < 1e-10);
        }
        let window = [-20.0, 60.0];
        let scan = homogeneous_scan(&et, &tau, window, 200);
        let exact: Vec<f64> = window_eigenpairs(&fixed, window).iter().map(|p| p.lambda.re).collect();
        assert_eq!(scan.roots.len(), exact.len(), "{:?} vs {:?}", scan.roots, exact);
        for (r, e) in scan.roots.iter().zip(&exact) {
            assert!((r - e).abs() < 1e-6);
        }
        let corr = eigen_correspondence(&lin, &et, &tau, window, &scan.roots, 1e-8).unwrap();
        assert!(corr.passed(), "{:?}", corr.failures());
    }

    #[test]
    fn large_theta_approaches_dirichlet() {
        let et = problem_1d(30);
        let mut rng = linalg::rng(4);
        let g = linalg::random_vector(&mut rng, 30);
        let l = c(2.0, 1.0);
        let dir = vec_of(&et.dirichlet_solve(l, &col(&g)).unwrap());
        let errs: Vec<f64> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&s| {
                let tau = ConstantFunction::new(linalg::eye(2) * re(s)).unwrap();
                relerr(&direct_solve(&et, &tau, l, &g).unwrap(), &dir)
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-4, "{errs:?}");
    }

    #[test]
    fn rational_m2_spectrum_and_scan() {
        let et = problem_1d(99);
        let tau = rational_m2();
        let lin = build_linearization_rational(&et, &tau).unwrap();
        assert!(lin.w_symmetry_residual() < 1e-10);
        assert!(lin.symmetrized_max_imag().unwrap() < 1e-9);
        let general = build_linearization(&et, &realize_rational(&tau).unwrap()).unwrap();
        assert!((general.matrix() - lin.matrix()).norm() < 1e-10 * lin.matrix().norm());
        let mut rng = linalg::rng(5);
        for _ in 0..5 {
            let l = c(rng.random_range(-50.0..50.0), rng.random_range(0.1..5.0));
            let g = linalg::random_vector(&mut rng, 99);
            let k = krein_resolve(&et, &tau, l, &g).unwrap();
            assert!(relerr(&lin.compressed_resolvent(l, &g).unwrap(), &k.f) < 1e-10);
            assert!(relerr(&direct_solve(&et, &tau, l, &g).unwrap(), &k.f) < 1e-10);
        }
        for window in [[-40.0, 9.5], [10.0, 24.99]] {
            let scan = homogeneous_scan(&et, &tau, window, 300);
            assert!(!scan.roots.is_empty());
            let corr = eigen_correspondence(&lin, &et, &tau, window, &scan.roots, 1e-6).unwrap();
            assert!(corr.passed(), "{:?}", corr.failures());
            assert_eq!(corr.checks.len(), scan.roots.len());
            for ch in &corr.checks {
                assert!(ch.sigma_min <= 1e-6);
            }
        }
    }

    #[test]
    fn nevanlinna_solvable_off_axis() {
        let et = problem_1d(30);
        let tau = rational_m2();
        let probes = crate::opfunc::Window { re: [-40.0, 40.0], im: [0.01, 5.0] }.sample(8, 50);
        let res = solvability_probe(&et, &tau, &probes).unwrap();
        assert!(res.iter().all(|m| m.in_u));
    }

    #[test]
    fn pole_is_outside_u() {
        let et = problem_1d(20);
        let tau = rational_m2();
        let g = Vector::from_element(20, re(1.0));
        assert!(matches!(krein_resolve(&et, &tau, re(25.0), &g), Err(Error::OutsideU { .. })));
        assert!(!membership(&et, &tau, re(30.0)).unwrap().in_u);
    }

    #[test]
    fn non_strict_tau_through_realization() {
        // diag(λ, 5): β1 singular, so the linearization couples to a Krein space
        let et = problem_1d(30);
        let alpha = diag(&[0.0, 5.0]);
        let beta = diag(&[1.0, 0.0]);
        let tau = OperatorFunction::Rational(RationalNevanlinna::new(vec![alpha], vec![beta]).unwrap());
        let r = realize(&tau, &RealizeOptions::default()).unwrap();
        let lin = linearize(&et, &tau, Some(&r.triple)).unwrap();
        assert!(lin.w_symmetry_residual() < 1e-10);
        let mut rng = linalg::rng(6);
        let g = linalg::random_vector(&mut rng, 30);
        let l = c(0.5, 1.5);
        let k = krein_resolve(&et, &tau, l, &g).unwrap();
        assert!(relerr(&lin.compressed_resolvent(l, &g).unwrap(), &k.f) < 1e-9);
    }
}
