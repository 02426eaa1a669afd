//! Observables as kernels on the (x, y) plane, character-dependent twisted
//! compositions and brackets, p-mechanisation of polynomial Hamiltonians,
//! and the oscillator dynamics solvers.
//!
//! Kernels are sampled on uniform half-open grids (right endpoint excluded),
//! so differences of node coordinates are again node coordinates and the
//! twisted convolutions need no interpolation. Quadrature uses uniform cell
//! weights; operands are expected to decay below 1e-10 at the box boundary
//! and results carry a flag when they do not.

use crate::error::{CoreError, Result};
use crate::heisenberg::GroupFn;
use crate::hypercomplex::{char_exp, HScalar, UnitTag};
use crate::repr::CharacterParams;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::fmt;

/// Decay threshold at the grid boundary below which truncation is considered
/// harmless.
pub const BOUNDARY_DECAY_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Uniform half-open 2D grid: node (i, j) sits at
/// (x_min + i dx, y_min + j dy) with dx = (x_max - x_min)/nx.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2 {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(CoreError::InvalidParameter("grid points per axis", nx.min(ny) as f64));
        }
        if !(x_min < x_max) || !(y_min < y_max) {
            return Err(CoreError::InvalidParameter("grid extent", x_max - x_min));
        }
        Ok(Grid2 { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Square box [-l, l)^2 with n points per axis.
    pub fn square(l: f64, n: usize) -> Result<Self> {
        Grid2::new(-l, l, -l, l, n, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    /// True when the box is centred at the origin, so node differences are
    /// nodes again. The twisted convolutions require this.
    pub fn symmetric(&self) -> bool {
        self.x_min == -self.x_max && self.y_min == -self.y_max
    }

    fn origin_index(&self) -> (usize, usize) {
        (self.nx / 2, self.ny / 2)
    }
}

// ---------------------------------------------------------------------------
// Observable kernels
// ---------------------------------------------------------------------------

/// Partial-Fourier-transformed observable kernel sampled on a grid.
#[derive(Debug, Clone)]
pub struct ObservableKernel {
    pub grid: Grid2,
    pub data: Array2<HScalar>,
    pub params: CharacterParams,
    /// Set when an operand of a quadrature failed the boundary-decay check.
    pub boundary_flag: bool,
}

impl ObservableKernel {
    pub fn from_fn<F>(grid: Grid2, params: CharacterParams, f: F) -> Self
    where
        F: Fn(f64, f64) -> HScalar,
    {
        let data = Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| f(grid.x(i), grid.y(j)));
        ObservableKernel { grid, data, params, boundary_flag: false }
    }

    /// Real Gaussian bump exp(-((x-cx)^2 + (y-cy)^2)/(2 w^2)).
    pub fn gaussian(grid: Grid2, params: CharacterParams, cx: f64, cy: f64, w: f64) -> Self {
        ObservableKernel::from_fn(grid, params, |x, y| {
            HScalar::real((-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp())
        })
    }

    /// Discrete delta at the origin node, scaled by 1/cell so that twisted
    /// convolution against it is the identity.
    pub fn dirac(grid: Grid2, params: CharacterParams) -> Self {
        let (i0, j0) = grid.origin_index();
        let amp = 1.0 / grid.cell_area();
        let data = Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| {
            if i == i0 && j == j0 {
                HScalar::real(amp)
            } else {
                HScalar::ZERO
            }
        });
        ObservableKernel { grid, data, params, boundary_flag: false }
    }

    /// Distributional kernel of the harmonic Hamiltonian
    /// H = (m w^2 X^2 + Y^2/m)/2, realised as second-difference stencils at
    /// the origin. Its bracket against a smooth kernel reproduces the
    /// harmonic advection operator up to O(dx^2).
    pub fn harmonic_hamiltonian(grid: Grid2, params: CharacterParams, osc: &OscillatorParams) -> Self {
        let (i0, j0) = grid.origin_index();
        let a = 0.5 * osc.m * osc.omega * osc.omega;
        let b = 0.5 / osc.m;
        let (dx, dy, da) = (grid.dx(), grid.dy(), grid.cell_area());
        let mut data = Array2::from_elem((grid.nx, grid.ny), HScalar::ZERO);
        data[[i0, j0]] = HScalar::real((-2.0 * a / (dx * dx) - 2.0 * b / (dy * dy)) / da);
        data[[i0 - 1, j0]] = HScalar::real(a / (dx * dx) / da);
        data[[i0 + 1, j0]] = HScalar::real(a / (dx * dx) / da);
        data[[i0, j0 - 1]] = HScalar::real(b / (dy * dy) / da);
        data[[i0, j0 + 1]] = HScalar::real(b / (dy * dy) / da);
        ObservableKernel { grid, data, params, boundary_flag: false }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.max_abs()).fold(0.0, f64::max)
    }

    /// Largest absolute sample on the boundary ring of the grid.
    pub fn max_boundary_abs(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut worst = 0.0f64;
        for i in 0..nx {
            worst = worst.max(self.data[[i, 0]].max_abs());
            worst = worst.max(self.data[[i, ny - 1]].max_abs());
        }
        for j in 0..ny {
            worst = worst.max(self.data[[0, j]].max_abs());
            worst = worst.max(self.data[[nx - 1, j]].max_abs());
        }
        worst
    }

    pub fn decays_at_boundary(&self) -> bool {
        self.max_boundary_abs() <= BOUNDARY_DECAY_TOL * (1.0 + self.max_abs())
    }

    pub fn max_abs_diff(&self, other: &ObservableKernel) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(mut self, k: f64) -> Self {
        self.data.mapv_inplace(|v| v.scale(k));
        self
    }

    pub fn map(mut self, f: impl Fn(HScalar) -> HScalar) -> Self {
        self.data.mapv_inplace(f);
        self
    }
}

fn check_grids(k1: &ObservableKernel, k2: &ObservableKernel) -> Result<()> {
    if k1.grid != k2.grid {
        return Err(CoreError::GridMismatch);
    }
    if !k1.grid.symmetric() {
        return Err(CoreError::GridMismatch);
    }
    Ok(())
}

/// Core twisted quadrature
/// out(x, y) = dA sum_{x', y'} w(omega(x,y;x',y')) k1(x', y') k2(x-x', y-y'),
/// with zero extension of k2 outside the box.
fn twisted_sum<W>(k1: &ObservableKernel, k2: &ObservableKernel, weight: W) -> Array2<HScalar>
where
    W: Fn(f64) -> HScalar + Sync,
{
    let grid = &k1.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let da = grid.cell_area();
    // x - x' = (i - i') dx lands on node i - i' + nx/2 of the symmetric box
    let (ox, oy) = grid.origin_index();
    let mut out = Array2::from_elem((nx, ny), HScalar::ZERO);
    out.indexed_iter_mut()
        .collect::<Vec<_>>()
        .par_iter_mut()
        .for_each(|((i, j), slot)| {
            let (x, y) = (grid.x(*i), grid.y(*j));
            let mut acc = HScalar::ZERO;
            for ip in 0..nx {
                let mi = *i as isize - ip as isize + ox as isize;
                if mi < 0 || mi >= nx as isize {
                    continue;
                }
                let xp = grid.x(ip);
                for jp in 0..ny {
                    let mj = *j as isize - jp as isize + oy as isize;
                    if mj < 0 || mj >= ny as isize {
                        continue;
                    }
                    let v2 = k2.data[[mi as usize, mj as usize]];
                    if v2 == HScalar::ZERO {
                        continue;
                    }
                    let v1 = k1.data[[ip, jp]];
                    if v1 == HScalar::ZERO {
                        continue;
                    }
                    let yp = grid.y(jp);
                    let om = x * yp - xp * y;
                    acc = acc + weight(om) * v1 * v2;
                }
            }
            **slot = acc.scale(da);
        });
    out
}

/// Twisted composition of kernels for the given character:
/// weight e^{i H omega / 2} (elliptic), e^{h H omega} (hyperbolic),
/// e^{p H omega} = 1 + p H omega (parabolic), H = 2 pi hbar.
pub fn star_compose(
    unit: UnitTag,
    k1: &ObservableKernel,
    k2: &ObservableKernel,
) -> Result<ObservableKernel> {
    check_grids(k1, k2)?;
    let ch = k1.params.h();
    let flag = !k1.decays_at_boundary() || !k2.decays_at_boundary();
    let data = match unit {
        UnitTag::Elliptic => twisted_sum(k1, k2, |om| char_exp(UnitTag::Elliptic, 0.5 * ch * om)),
        UnitTag::Hyperbolic => twisted_sum(k1, k2, |om| char_exp(UnitTag::Hyperbolic, ch * om)),
        UnitTag::Parabolic => twisted_sum(k1, k2, |om| char_exp(UnitTag::Parabolic, ch * om)),
    };
    Ok(ObservableKernel { grid: k1.grid.clone(), data, params: k1.params, boundary_flag: flag })
}

/// The (x y' - y x')-weighted quadrature shared by the parabolic bracket and
/// the Moyal-limit oracle: the phase-space Poisson bracket written in kernel
/// coordinates. Antisymmetrised, so swapping the arguments flips the sign
/// exactly.
pub fn poisson_quadrature(k1: &ObservableKernel, k2: &ObservableKernel) -> Result<ObservableKernel> {
    check_grids(k1, k2)?;
    let flag = !k1.decays_at_boundary() || !k2.decays_at_boundary();
    let b12 = twisted_sum(k1, k2, |om| HScalar::real(om));
    let b21 = twisted_sum(k2, k1, |om| HScalar::real(om));
    let data = ndarray::Zip::from(&b12).and(&b21).map_collect(|a, b| (*a - *b).scale(0.5));
    Ok(ObservableKernel { grid: k1.grid.clone(), data, params: k1.params, boundary_flag: flag })
}

/// Character-dependent bracket of two kernels:
/// elliptic 2i sin(H omega/2), hyperbolic sinh(H omega), parabolic
/// p H omega. The quadrature is antisymmetrised, so
/// bracket(k1, k2) = -bracket(k2, k1) holds exactly.
pub fn bracket(
    unit: UnitTag,
    k1: &ObservableKernel,
    k2: &ObservableKernel,
) -> Result<ObservableKernel> {
    check_grids(k1, k2)?;
    let ch = k1.params.h();
    if unit == UnitTag::Parabolic {
        // p H x (Poisson-type quadrature), exactly
        let w = poisson_quadrature(k1, k2)?;
        let data = w.data.mapv(|v| HScalar::unit_p().scale(ch) * v);
        return Ok(ObservableKernel { data, ..w });
    }
    let flag = !k1.decays_at_boundary() || !k2.decays_at_boundary();
    let weight = move |om: f64| match unit {
        UnitTag::Elliptic => HScalar::complex(0.0, 2.0 * (0.5 * ch * om).sin()),
        UnitTag::Hyperbolic => HScalar::real((ch * om).sinh()),
        UnitTag::Parabolic => unreachable!(),
    };
    let b12 = twisted_sum(k1, k2, weight);
    let b21 = twisted_sum(k2, k1, weight);
    let data = ndarray::Zip::from(&b12).and(&b21).map_collect(|a, b| (*a - *b).scale(0.5));
    Ok(ObservableKernel { grid: k1.grid.clone(), data, params: k1.params, boundary_flag: flag })
}

/// Right-hand side of the reduced dynamic equation, the bracket scaled per
/// character: 1/(iH) (elliptic), 1/H (hyperbolic, taking the displayed sinh
/// bracket), and for the parabolic character the common factor pH is
/// cancelled from both sides, leaving the real Poisson-type quadrature.
pub fn heisenberg_rhs(
    unit: UnitTag,
    h_kernel: &ObservableKernel,
    f_kernel: &ObservableKernel,
) -> Result<ObservableKernel> {
    let ch = h_kernel.params.h();
    match unit {
        UnitTag::Elliptic => {
            let b = bracket(unit, h_kernel, f_kernel)?;
            // 1/(iH) = -i/H
            let data = b.data.mapv(|v| v * HScalar::complex(0.0, -1.0 / ch));
            Ok(ObservableKernel { data, ..b })
        }
        UnitTag::Hyperbolic => Ok(bracket(unit, h_kernel, f_kernel)?.scale(1.0 / ch)),
        UnitTag::Parabolic => poisson_quadrature(h_kernel, f_kernel),
    }
}

// ---------------------------------------------------------------------------
// Polynomial Hamiltonians and p-mechanisation
// ---------------------------------------------------------------------------

/// Oscillator data: mass, frequency, cubic coupling (0 for harmonic).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub m: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl OscillatorParams {
    pub fn new(m: f64, omega: f64, lambda: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(CoreError::InvalidParameter("mass", m));
        }
        if !(omega > 0.0) {
            return Err(CoreError::InvalidParameter("frequency", omega));
        }
        Ok(OscillatorParams { m, omega, lambda })
    }

    pub fn harmonic(m: f64, omega: f64) -> Result<Self> {
        OscillatorParams::new(m, omega, 0.0)
    }
}

/// Real polynomial in (q, p) as a list of (coefficient, q-power, p-power).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyQP {
    pub terms: Vec<(f64, u32, u32)>,
}

impl PolyQP {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        PolyQP { terms }
    }

    /// H = (m w^2 q^2 + p^2/m)/2.
    pub fn harmonic(osc: &OscillatorParams) -> Self {
        PolyQP::new(vec![
            (0.5 * osc.m * osc.omega * osc.omega, 2, 0),
            (0.5 / osc.m, 0, 2),
        ])
    }

    /// H = m w^2 q^2/2 + lambda q^3/6 + p^2/(2m).
    pub fn cubic(osc: &OscillatorParams) -> Self {
        PolyQP::new(vec![
            (0.5 * osc.m * osc.omega * osc.omega, 2, 0),
            (osc.lambda / 6.0, 3, 0),
            (0.5 / osc.m, 0, 2),
        ])
    }

    pub fn total_degree(&self) -> usize {
        self.terms.iter().map(|(_, j, k)| (j + k) as usize).max().unwrap_or(0)
    }
}

/// Descriptor of the p-mechanised operator: coefficients of X^j Y^k.
#[derive(Debug, Clone, PartialEq)]
pub struct PMechOperator {
    pub terms: Vec<(f64, u32, u32)>,
}

impl fmt::Display for PMechOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, jx, jy)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if *jx > 0 {
                write!(f, "*X^{jx}")?;
            }
            if *jy > 0 {
                write!(f, "*Y^{jy}")?;
            }
        }
        Ok(())
    }
}

/// Map a polynomial Hamiltonian to its differential-operator descriptor by
/// the monomial substitution q -> X, p -> Y. Inputs are commutative, so no
/// ordering choices arise. Total degree is capped at 3, the validated range.
pub fn pmechanise(h: &PolyQP) -> Result<PMechOperator> {
    let deg = h.total_degree();
    if deg > 3 {
        return Err(CoreError::DegreeTooHigh(deg, 3));
    }
    Ok(PMechOperator { terms: h.terms.clone() })
}

// ---------------------------------------------------------------------------
// Harmonic flow on the group
// ---------------------------------------------------------------------------

/// Exact solution handle for the harmonic p-dynamics:
/// f(t; s, x, y) = f0(s, x cos wt + m w y sin wt, -(x/(m w)) sin wt + y cos wt),
/// applied componentwise in (x_j, y_j). Period 2 pi / w.
pub fn harmonic_flow(osc: &OscillatorParams, f0: &GroupFn, t: f64) -> Result<GroupFn> {
    if osc.lambda != 0.0 {
        return Err(CoreError::LambdaNonzero(osc.lambda));
    }
    let (m, w) = (osc.m, osc.omega);
    let (c, s) = ((w * t).cos(), (w * t).sin());
    let inner = f0.clone();
    Ok(GroupFn::new(f0.n(), f0.kind(), move |g| {
        let mut gx = g.clone();
        for j in 0..gx.n() {
            let (x, y) = (g.x[j], g.y[j]);
            gx.x[j] = x * c + m * w * y * s;
            gx.y[j] = -(x / (m * w)) * s + y * c;
        }
        inner.eval(&gx)
    }))
}

// ---------------------------------------------------------------------------
// Phase-space fields and the cubic-oscillator solver
// ---------------------------------------------------------------------------

/// Real field f(q, p) sampled on a uniform grid; axis 0 is q, axis 1 is p.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub grid: Grid2,
    pub data: Array2<f64>,
    pub time: f64,
}

impl PhaseField {
    pub fn from_fn<F>(grid: Grid2, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64,
    {
        let data = Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| f(grid.x(i), grid.y(j)));
        PhaseField { grid, data, time: 0.0 }
    }

    pub fn gaussian(grid: Grid2, cq: f64, cp: f64, w: f64) -> Self {
        PhaseField::from_fn(grid, |q, p| {
            (-((q - cq).powi(2) + (p - cp).powi(2)) / (2.0 * w * w)).exp()
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.data.sum() * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn l2_diff(&self, other: &PhaseField) -> f64 {
        let s: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (s * self.grid.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Spectral wavenumbers for a periodic axis of n points and length l.
fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    let base = 2.0 * PI / l;
    (0..n)
        .map(|j| {
            let jj = if j <= n / 2 { j as isize } else { j as isize - n as isize };
            if 2 * j == n {
                0.0 // drop the Nyquist mode for odd derivatives
            } else {
                base * jj as f64
            }
        })
        .collect()
}

struct SpectralDiff {
    kq: Vec<f64>,
    kp: Vec<f64>,
    fft_q: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft_q: std::sync::Arc<dyn rustfft::Fft<f64>>,
    fft_p: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft_p: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl SpectralDiff {
    fn new(grid: &Grid2) -> Self {
        let mut planner = FftPlanner::new();
        SpectralDiff {
            kq: wavenumbers(grid.nx, grid.x_max - grid.x_min),
            kp: wavenumbers(grid.ny, grid.y_max - grid.y_min),
            fft_q: planner.plan_fft_forward(grid.nx),
            ifft_q: planner.plan_fft_inverse(grid.nx),
            fft_p: planner.plan_fft_forward(grid.ny),
            ifft_p: planner.plan_fft_inverse(grid.ny),
        }
    }

    /// d/dq along axis 0.
    fn ddq(&self, f: &Array2<f64>) -> Array2<f64> {
        let (nq, np) = f.dim();
        let mut out = Array2::zeros((nq, np));
        let mut col = vec![Complex64::default(); nq];
        for j in 0..np {
            for i in 0..nq {
                col[i] = Complex64::new(f[[i, j]], 0.0);
            }
            self.fft_q.process(&mut col);
            for i in 0..nq {
                col[i] *= Complex64::new(0.0, self.kq[i] / nq as f64);
            }
            self.ifft_q.process(&mut col);
            for i in 0..nq {
                out[[i, j]] = col[i].re;
            }
        }
        out
    }

    /// d/dp and d^3/dp^3 along axis 1 in one pass.
    fn ddp_and_d3p(&self, f: &Array2<f64>, want_d3: bool) -> (Array2<f64>, Option<Array2<f64>>) {
        let (nq, np) = f.dim();
        let mut d1 = Array2::zeros((nq, np));
        let mut d3 = if want_d3 { Some(Array2::zeros((nq, np))) } else { None };
        let mut row = vec![Complex64::default(); np];
        let mut row3 = vec![Complex64::default(); np];
        for i in 0..nq {
            for j in 0..np {
                row[j] = Complex64::new(f[[i, j]], 0.0);
            }
            self.fft_p.process(&mut row);
            if want_d3 {
                for j in 0..np {
                    let ik = Complex64::new(0.0, self.kp[j]);
                    row3[j] = row[j] * ik * ik * ik / np as f64;
                }
            }
            for j in 0..np {
                row[j] *= Complex64::new(0.0, self.kp[j] / np as f64);
            }
            self.ifft_p.process(&mut row);
            for j in 0..np {
                d1[[i, j]] = row[j].re;
            }
            if let Some(d3a) = d3.as_mut() {
                self.ifft_p.process(&mut row3);
                for j in 0..np {
                    d3a[[i, j]] = row3[j].re;
                }
            }
        }
        (d1, d3)
    }
}

/// A stability bound of CFL type for the RK4/spectral scheme:
/// dt <= 2.8 / (k_q,max v_q,max + k_p,max v_p,max + |disp| k_p,max^3).
pub fn cfl_bound(grid: &Grid2, osc: &OscillatorParams, hbar: f64, unit: UnitTag) -> f64 {
    let kq_max = PI / grid.dx();
    let kp_max = PI / grid.dy();
    let qmax = grid.x_min.abs().max(grid.x_max.abs());
    let pmax = grid.y_min.abs().max(grid.y_max.abs());
    let vq = pmax / osc.m;
    let vp = osc.m * osc.omega * osc.omega * qmax + 0.5 * osc.lambda.abs() * qmax * qmax;
    let disp = dispersion_coeff(unit, osc, hbar).abs();
    2.8 / (kq_max * vq + kp_max * vp + disp * kp_max.powi(3))
}

/// Coefficient of the third p-derivative for the unit: -lambda hbar^2/24
/// (elliptic), +lambda hbar^2/24 (hyperbolic), 0 (parabolic).
pub fn dispersion_coeff(unit: UnitTag, osc: &OscillatorParams, hbar: f64) -> f64 {
    match unit {
        UnitTag::Elliptic => -osc.lambda * hbar * hbar / 24.0,
        UnitTag::Hyperbolic => osc.lambda * hbar * hbar / 24.0,
        UnitTag::Parabolic => 0.0,
    }
}

/// One evaluation of the phase-space right-hand side
/// (m w^2 q + (lambda/2) q^2) df/dp - (p/m) df/dq + disp d^3f/dp^3.
/// With lambda = 0 all three characters take literally the same path, so the
/// right-hand sides agree bitwise.
fn cubic_rhs(
    f: &Array2<f64>,
    grid: &Grid2,
    osc: &OscillatorParams,
    disp: f64,
    sd: &SpectralDiff,
    lambda_zero: bool,
) -> Array2<f64> {
    let dq = sd.ddq(f);
    let (dp, d3p) = sd.ddp_and_d3p(f, !lambda_zero);
    let (nq, np) = f.dim();
    let mut out = Array2::zeros((nq, np));
    for i in 0..nq {
        let q = grid.x(i);
        let aq = osc.m * osc.omega * osc.omega * q + 0.5 * osc.lambda * q * q;
        for j in 0..np {
            let p = grid.y(j);
            out[[i, j]] = aq * dp[[i, j]] - p / osc.m * dq[[i, j]];
        }
    }
    if let Some(d3) = d3p {
        if !lambda_zero {
            for i in 0..nq {
                for j in 0..np {
                    out[[i, j]] += disp * d3[[i, j]];
                }
            }
        }
    }
    out
}

/// Evaluate the dynamics right-hand side once on a sampled field. Exposed so
/// the per-character agreement at lambda = 0 can be checked bit for bit.
pub fn cubic_rhs_field(
    unit: UnitTag,
    osc: &OscillatorParams,
    f: &PhaseField,
    hbar: f64,
) -> PhaseField {
    let sd = SpectralDiff::new(&f.grid);
    let disp = dispersion_coeff(unit, osc, hbar);
    let data = cubic_rhs(&f.data, &f.grid, osc, disp, &sd, osc.lambda == 0.0);
    PhaseField { grid: f.grid.clone(), data, time: f.time }
}

/// Time-step the phase-space dynamics of the (possibly cubic) oscillator for
/// the given character: spectral differentiation in both axes, explicit RK4
/// with fixed step. dt is adjusted to divide t_final exactly; see
/// [`cfl_bound`] for the stability limit. A field-norm growth beyond 10x
/// aborts with a diagnostic.
pub fn evolve_cubic(
    unit: UnitTag,
    osc: &OscillatorParams,
    f0: &PhaseField,
    hbar: f64,
    t_final: f64,
    dt: f64,
) -> Result<PhaseField> {
    let steps = ((t_final / dt).round() as usize).max(1);
    let dt = t_final / steps as f64;
    let sd = SpectralDiff::new(&f0.grid);
    let disp = dispersion_coeff(unit, osc, hbar);
    let lambda_zero = osc.lambda == 0.0;
    let norm0 = f0.max_abs();
    let mut f = f0.data.clone();
    for step in 0..steps {
        let k1 = cubic_rhs(&f, &f0.grid, osc, disp, &sd, lambda_zero);
        let f2 = &f + &(&k1 * (0.5 * dt));
        let k2 = cubic_rhs(&f2, &f0.grid, osc, disp, &sd, lambda_zero);
        let f3 = &f + &(&k2 * (0.5 * dt));
        let k3 = cubic_rhs(&f3, &f0.grid, osc, disp, &sd, lambda_zero);
        let f4 = &f + &(&k3 * dt);
        let k4 = cubic_rhs(&f4, &f0.grid, osc, disp, &sd, lambda_zero);
        f = &f + &((&k1 + &(&k2 * 2.0) + &(&k3 * 2.0) + &k4) * (dt / 6.0));
        let norm = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !norm.is_finite() || norm > 10.0 * norm0 {
            return Err(CoreError::Instability {
                t: (step + 1) as f64 * dt,
                growth: norm / norm0,
            });
        }
    }
    Ok(PhaseField { grid: f0.grid.clone(), data: f, time: f0.time + t_final })
}

/// Classical characteristics of the harmonic flow, integrated by RK4; used
/// for energy-conservation checks.
pub fn harmonic_characteristic(
    osc: &OscillatorParams,
    q0: f64,
    p0: f64,
    t: f64,
    steps: usize,
) -> (f64, f64) {
    let dt = t / steps as f64;
    let rhs = |q: f64, p: f64| (p / osc.m, -osc.m * osc.omega * osc.omega * q);
    let (mut q, mut p) = (q0, p0);
    for _ in 0..steps {
        let (k1q, k1p) = rhs(q, p);
        let (k2q, k2p) = rhs(q + 0.5 * dt * k1q, p + 0.5 * dt * k1p);
        let (k3q, k3p) = rhs(q + 0.5 * dt * k2q, p + 0.5 * dt * k2p);
        let (k4q, k4p) = rhs(q + dt * k3q, p + dt * k3p);
        q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    (q, p)
}
