//! Finite-difference discretizations of `ℓ = -Σ ∂j ajk ∂k + a` on an
//! interval or a rectangle, and the boundary triple they carry.
//!
//! Nodes split into interior nodes `I` and boundary nodes `B`, and the
//! stencil into the blocks `L_II`, `L_IB`, `L_BI = L_IB^T`. The interior
//! space carries the weighted inner product `w v* u` with `w = h^d`; the
//! boundary space is Euclidean. With `Υ0 = y` and `Υ1 = -w L_BI f_D` the
//! abstract Green identity holds exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krein::KreinSpace;
use crate::linalg::{self, re, Mat, C64, COND_MAX};
use crate::triple::BoundaryTriple;

/// A coefficient given as a constant or an expression in `x` (and `y` in 2D).
///
/// Expressions use the usual arithmetic operators, `^`, parentheses and the
/// functions `sin cos tan exp ln sqrt abs` together with `pi` and `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    Expr(String),
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::Constant(0.0)
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

impl Coefficient {
    /// Compiles the coefficient into a sampler `(x, y) -> value`.
    pub fn sampler(&self, dim: usize) -> Result<Box<dyn Fn(f64, f64) -> f64>> {
        match self {
            Coefficient::Constant(v) => {
                let v = *v;
                Ok(Box::new(move |_, _| v))
            }
            Coefficient::Expr(s) => {
                let err = |e: meval::Error| Error::Expression {
                    expr: s.clone(),
                    message: e.to_string(),
                };
                let expr: meval::Expr = s.parse().map_err(err)?;
                if dim == 1 {
                    let f = expr.bind("x").map_err(err)?;
                    Ok(Box::new(move |x, _| f(x)))
                } else {
                    let f = expr.bind2("x", "y").map_err(err)?;
                    Ok(Box::new(f))
                }
            }
        }
    }
}

/// Grid geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// `n` interior nodes on `[a, b]`.
    Interval { a: f64, b: f64, n: usize },
    /// `nx x ny` interior nodes on `[x0, x1] x [y0, y1]`.
    Rect {
        x: [f64; 2],
        y: [f64; 2],
        nx: usize,
        ny: usize,
    },
}

/// An assembled stencil split into interior and boundary blocks.
#[derive(Debug, Clone)]
pub struct DiscreteElliptic {
    geometry: Geometry,
    spacing: Vec<f64>,
    weight: f64,
    l_ii: Mat,
    l_ib: Mat,
    l_bb: Mat,
    interior: Vec<[f64; 2]>,
    boundary: Vec<[f64; 2]>,
}

fn check_positive(name: &str, x: f64, y: f64, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveCoefficient {
            name: name.to_string(),
            x,
            y,
            value,
        })
    }
}

fn check_finite(name: &str, x: f64, y: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveCoefficient {
            name: name.to_string(),
            x,
            y,
            value,
        })
    }
}

/// Three-point stencil for `-(p u')' + a u` with `n` interior nodes on
/// `[a, b]`; `p` is sampled at the half points. Boundary order: left, right.
pub fn build_1d(n: usize, p: &Coefficient, a: &Coefficient, interval: [f64; 2]) -> Result<DiscreteElliptic> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 interior nodes, got {n}")));
    }
    if interval[1].partial_cmp(&interval[0]) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidInput(format!("empty interval {interval:?}")));
    }
    let (ps, as_) = (p.sampler(1)?, a.sampler(1)?);
    let h = (interval[1] - interval[0]) / (n + 1) as f64;
    let x = |i: f64| interval[0] + i * h;
    let half = (0..=n)
        .map(|i| {
            let xi = x(i as f64 + 0.5);
            check_positive("p", xi, 0.0, ps(xi, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let h2 = h * h;
    let mut l_ii = linalg::zeros(n, n);
    for i in 0..n {
        let xi = x(i as f64 + 1.0);
        let ai = check_finite("a", xi, 0.0, as_(xi, 0.0))?;
        l_ii[(i, i)] = re((half[i] + half[i + 1]) / h2 + ai);
        if i + 1 < n {
            l_ii[(i, i + 1)] = re(-half[i + 1] / h2);
            l_ii[(i + 1, i)] = re(-half[i + 1] / h2);
        }
    }
    let mut l_ib = linalg::zeros(n, 2);
    l_ib[(0, 0)] = re(-half[0] / h2);
    l_ib[(n - 1, 1)] = re(-half[n] / h2);
    Ok(DiscreteElliptic {
        geometry: Geometry::Interval {
            a: interval[0],
            b: interval[1],
            n,
        },
        spacing: vec![h],
        weight: h,
        l_ii,
        l_ib,
        l_bb: linalg::zeros(2, 2),
        interior: (1..=n).map(|i| [x(i as f64), 0.0]).collect(),
        boundary: vec![[interval[0], 0.0], [interval[1], 0.0]],
    })
}

/// Five-point stencil for `-∂x a11 ∂x - ∂y a22 ∂y + a` on a rectangle with
/// `nx x ny` interior nodes. Interior node `(i, j)` has index
/// `(j - 1) nx + (i - 1)`.
///
/// The two boundary nodes flanking a corner touch the same interior node, so
/// they share one boundary value, reported at the corner. Boundary values
/// run counterclockwise from the lower-left corner, `2 (nx + ny) - 4` in all.
pub fn build_2d(
    nx: usize,
    ny: usize,
    a11: &Coefficient,
    a22: &Coefficient,
    a: &Coefficient,
    rect: [[f64; 2]; 2],
) -> Result<DiscreteElliptic> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidInput(format!("need at least 3x3 interior nodes, got {nx}x{ny}")));
    }
    let [xr, yr] = rect;
    if !(xr[1] > xr[0] && yr[1] > yr[0]) {
        return Err(Error::InvalidInput(format!("empty rectangle {rect:?}")));
    }
    let (s11, s22, sa) = (a11.sampler(2)?, a22.sampler(2)?, a.sampler(2)?);
    let hx = (xr[1] - xr[0]) / (nx + 1) as f64;
    let hy = (yr[1] - yr[0]) / (ny + 1) as f64;
    let px = |i: f64| xr[0] + i * hx;
    let py = |j: f64| yr[0] + j * hy;
    let n_i = nx * ny;
    let n_b = 2 * (nx + ny) - 4;
    let interior_index = |i: usize, j: usize| (j - 1) * nx + (i - 1);
    let (ll, lr, ur, ul) = (0, nx - 1, nx + ny - 2, 2 * nx + ny - 3);
    let boundary_index = |i: usize, j: usize| -> usize {
        if j == 0 {
            match i {
                1 => ll,
                _ if i == nx => lr,
                _ => i - 1,
            }
        } else if i == nx + 1 {
            match j {
                1 => lr,
                _ if j == ny => ur,
                _ => lr + j - 1,
            }
        } else if j == ny + 1 {
            match i {
                1 => ul,
                _ if i == nx => ur,
                _ => ur + nx - i,
            }
        } else {
            match j {
                1 => ll,
                _ if j == ny => ul,
                _ => ul + ny - j,
            }
        }
    };
    let mut l_ii = linalg::zeros(n_i, n_i);
    let mut l_ib = linalg::zeros(n_i, n_b);
    let mut boundary = vec![[0.0; 2]; n_b];
    for j in 1..=ny {
        for i in 1..=nx {
            let k = interior_index(i, j);
            let (x, y) = (px(i as f64), py(j as f64));
            let west = check_positive("a11", px(i as f64 - 0.5), y, s11(px(i as f64 - 0.5), y))? / (hx * hx);
            let east = check_positive("a11", px(i as f64 + 0.5), y, s11(px(i as f64 + 0.5), y))? / (hx * hx);
            let south = check_positive("a22", x, py(j as f64 - 0.5), s22(x, py(j as f64 - 0.5)))? / (hy * hy);
            let north = check_positive("a22", x, py(j as f64 + 0.5), s22(x, py(j as f64 + 0.5)))? / (hy * hy);
            let av = check_finite("a", x, y, sa(x, y))?;
            l_ii[(k, k)] = re(west + east + south + north + av);
            for (ni, nj, c) in [(i - 1, j, west), (i + 1, j, east), (i, j - 1, south), (i, j + 1, north)] {
                if ni == 0 || ni == nx + 1 || nj == 0 || nj == ny + 1 {
                    let b = boundary_index(ni, nj);
                    l_ib[(k, b)] -= re(c);
                    boundary[b] = [px(ni as f64), py(nj as f64)];
                } else {
                    l_ii[(k, interior_index(ni, nj))] = re(-c);
                }
            }
        }
    }
    for (b, corner) in [(ll, [xr[0], yr[0]]), (lr, [xr[1], yr[0]]), (ur, [xr[1], yr[1]]), (ul, [xr[0], yr[1]])] {
        boundary[b] = corner;
    }
    let mut interior = Vec::with_capacity(n_i);
    for j in 1..=ny {
        for i in 1..=nx {
            interior.push([px(i as f64), py(j as f64)]);
        }
    }
    Ok(DiscreteElliptic {
        geometry: Geometry::Rect { x: xr, y: yr, nx, ny },
        spacing: vec![hx, hy],
        weight: hx * hy,
        l_ii,
        l_ib,
        l_bb: linalg::zeros(n_b, n_b),
        interior,
        boundary,
    })
}

impl DiscreteElliptic {
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.spacing.len()
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Interior weight `w = h^d`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn n_interior(&self) -> usize {
        self.l_ii.nrows()
    }

    pub fn n_boundary(&self) -> usize {
        self.l_ib.ncols()
    }

    pub fn l_ii(&self) -> &Mat {
        &self.l_ii
    }

    pub fn l_ib(&self) -> &Mat {
        &self.l_ib
    }

    pub fn l_bi(&self) -> Mat {
        self.l_ib.transpose()
    }

    /// Boundary-boundary block; the stencils have no boundary rows, so this
    /// is zero.
    pub fn l_bb(&self) -> &Mat {
        &self.l_bb
    }

    /// Full symmetric matrix over `I ∪ B`.
    pub fn full(&self) -> Mat {
        linalg::vstack(&[
            &linalg::hstack(&[&self.l_ii, &self.l_ib]),
            &linalg::hstack(&[&self.l_bi(), &self.l_bb]),
        ])
    }

    /// Interior node coordinates (`y = 0` in 1D).
    pub fn interior_nodes(&self) -> &[[f64; 2]] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[[f64; 2]] {
        &self.boundary
    }

    /// Interior Hilbert space with Gram `w I`.
    pub fn interior_space(&self) -> KreinSpace {
        KreinSpace::weighted(self.n_interior(), self.weight)
    }
}

/// The Dirichlet operator `T_D = L_II`.
pub fn dirichlet_operator(de: &DiscreteElliptic) -> Mat {
    de.l_ii.clone()
}

/// `η = min σ(T_D) - 1`.
pub fn default_eta(de: &DiscreteElliptic) -> f64 {
    linalg::min_eigenvalue(&de.l_ii) - 1.0
}

/// `E_η = -(L_II - η)^{-1} L_IB`, whose columns are the discrete
/// η-harmonic extensions of the boundary unit vectors.
pub fn eta_extension(de: &DiscreteElliptic, eta: f64) -> Result<Mat> {
    let shifted = &de.l_ii - linalg::eye(de.n_interior()) * re(eta);
    linalg::solve_checked(&shifted, &(-&de.l_ib), COND_MAX).map_err(|cond| Error::SpectrumPoint {
        lambda: re(eta),
        cond,
    })
}

/// Boundary triple of the discrete elliptic problem.
///
/// `T = {(f_D + E y, T_D f_D + η E y)}`, `Υ0 = y`, `Υ1 = -w L_BI f_D`.
#[derive(Debug, Clone)]
pub struct EllipticTriple {
    de: DiscreteElliptic,
    eta: f64,
    e: Mat,
    l_bi: Mat,
    triple: BoundaryTriple,
}

/// Builds the triple at `η` (default `min σ(T_D) - 1`).
pub fn elliptic_triple(de: &DiscreteElliptic, eta: Option<f64>) -> Result<EllipticTriple> {
    let n_b = de.n_boundary();
    let n_i = de.n_interior();
    if linalg::rank(&de.l_ib, linalg::RTOL) < n_b {
        return Err(Error::RankDeficientCoupling);
    }
    let eta = eta.unwrap_or_else(|| default_eta(de));
    let e = eta_extension(de, eta)?;
    let l_bi = de.l_bi();
    let basis = linalg::vstack(&[
        &linalg::hstack(&[&linalg::eye(n_i), &e]),
        &linalg::hstack(&[&de.l_ii, &(&e * re(eta))]),
    ]);
    let g0 = linalg::hstack(&[&linalg::zeros(n_b, n_i), &linalg::eye(n_b)]);
    let g1 = linalg::hstack(&[&(&l_bi * re(-de.weight)), &linalg::zeros(n_b, n_b)]);
    let triple = BoundaryTriple::new(de.interior_space(), linalg::eye(n_b), basis, g0, g1)?;
    Ok(EllipticTriple {
        de: de.clone(),
        eta,
        e,
        l_bi,
        triple,
    })
}

impl EllipticTriple {
    pub fn discretization(&self) -> &DiscreteElliptic {
        &self.de
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn extension(&self) -> &Mat {
        &self.e
    }

    pub fn triple(&self) -> &BoundaryTriple {
        &self.triple
    }

    pub fn td(&self) -> &Mat {
        &self.de.l_ii
    }

    pub fn l_bi(&self) -> &Mat {
        &self.l_bi
    }

    pub fn weight(&self) -> f64 {
        self.de.weight
    }

    /// `(T_D - λ)^{-1} rhs`.
    pub fn dirichlet_solve(&self, lambda: C64, rhs: &Mat) -> Result<Mat> {
        let shifted = &self.de.l_ii - linalg::eye(self.de.n_interior()) * lambda;
        linalg::solve_checked(&shifted, rhs, COND_MAX).map_err(|cond| Error::SpectrumPoint { lambda, cond })
    }

    /// `γ(λ) = (I + (λ - η)(T_D - λ)^{-1}) E_η`.
    pub fn gamma(&self, lambda: C64) -> Result<Mat> {
        Ok(&self.e + self.dirichlet_solve(lambda, &self.e)? * (lambda - self.eta))
    }

    /// `M(λ) = w (η - λ) L_BI (T_D - λ)^{-1} E_η`.
    pub fn weyl(&self, lambda: C64) -> Result<Mat> {
        Ok(&self.l_bi * self.dirichlet_solve(lambda, &self.e)? * (re(self.eta) - lambda) * re(self.de.weight))
    }

    /// Both closed forms from one solve.
    pub fn gamma_weyl(&self, lambda: C64) -> Result<(Mat, Mat)> {
        let r = self.dirichlet_solve(lambda, &self.e)?;
        let gamma = &self.e + &r * (lambda - self.eta);
        let m = &self.l_bi * r * (re(self.eta) - lambda) * re(self.de.weight);
        Ok((gamma, m))
    }

    /// Parameters `(f_D, y)` of a pair `{f, g} ∈ T`: `L_IB y = g - T_D f`
    /// in the least-squares sense and `f_D = f - E_η y`.
    pub fn recover(&self, f: &Mat, g: &Mat) -> Result<(Mat, Mat)> {
        let rhs = g - &self.de.l_ii * f;
        let y = self
            .de
            .l_ib
            .clone()
            .svd(true, true)
            .solve(&rhs, 0.0)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let fd = f - &self.e * &y;
        Ok((fd, y))
    }

    /// The pair with parameters `(f_D, y)`.
    pub fn pair(&self, fd: &Mat, y: &Mat) -> (Mat, Mat) {
        (fd + &self.e * y, &self.de.l_ii * fd + &self.e * y * re(self.eta))
    }

    /// `(Υ0, Υ1) = (y, -w L_BI f_D)`.
    pub fn boundary_values(&self, fd: &Mat, y: &Mat) -> (Mat, Mat) {
        (y.clone(), &self.l_bi * fd * re(-self.de.weight))
    }
}

/// `n` in a problem config: a count in 1D, `[nx, ny]` in 2D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSize {
    One(usize),
    Two([usize; 2]),
}

/// `"auto"` or a real anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaJson {
    Value(f64),
    Auto(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a11: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a22: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Coefficient>,
}

/// Problem section of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub dim: usize,
    pub n: GridSize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub coeff: CoefficientsJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaJson>,
}

impl ProblemJson {
    /// Assembles the discretization; missing coefficients default to
    /// `p = a11 = a22 = 1`, `a = 0`, the domain to the unit interval or
    /// square.
    pub fn build(&self) -> Result<DiscreteElliptic> {
        let one = Coefficient::Constant(1.0);
        let c = &self.coeff;
        let a = c.a.clone().unwrap_or_default();
        match (self.dim, &self.n) {
            (1, GridSize::One(n)) => {
                if c.a11.is_some() || c.a22.is_some() {
                    return Err(Error::InvalidInput("1D problems take coefficients p and a".into()));
                }
                build_1d(*n, c.p.as_ref().unwrap_or(&one), &a, self.interval.unwrap_or([0.0, 1.0]))
            }
            (2, GridSize::Two([nx, ny])) => {
                if c.p.is_some() {
                    return Err(Error::InvalidInput("2D problems take coefficients a11, a22 and a".into()));
                }
                build_2d(
                    *nx,
                    *ny,
                    c.a11.as_ref().unwrap_or(&one),
                    c.a22.as_ref().unwrap_or(&one),
                    &a,
                    self.rect.unwrap_or([[0.0, 1.0], [0.0, 1.0]]),
                )
            }
            (d, n) => Err(Error::InvalidInput(format!("grid size {n:?} does not fit dimension {d}"))),
        }
    }

    /// The configured anchor, `None` for automatic.
    pub fn eta(&self) -> Result<Option<f64>> {
        match &self.eta {
            None => Ok(None),
            Some(EtaJson::Value(v)) => Ok(Some(*v)),
            Some(EtaJson::Auto(s)) if s == "auto" => Ok(None),
            Some(EtaJson::Auto(s)) => Err(Error::InvalidInput(format!("eta must be \"auto\" or a number, got {s:?}"))),
        }
    }

    pub fn build_triple(&self) -> Result<EllipticTriple> {
        elliptic_triple(&self.build()?, self.eta()?)
    }
}
