//! States, their kernel functionals l(g) = <v, rho(g) v>, measurements of
//! the position observable, probability addition and two-slit interference
//! for the three characters.
//!
//! States are unit-normalised at construction, so l(identity) = 1 and the
//! closed-form measurement curves carry no stray prefactors. All state
//! evaluators are real-valued.
//!
//! The hyperbolic measurement path replaces the character phases of the
//! analytic elliptic transforms by their hyperbolic counterparts
//! (e^{i t} -> cosh t + h sinh t) while keeping the decay envelopes; the
//! honest integral transforms do not converge for the heavy-tailed states,
//! and the two Gaussian continuation identities fix this choice.

use crate::error::{CoreError, Result};
use crate::heisenberg::{inverse, GroupElement, PhaseFn, ValueKind};
use crate::hypercomplex::{char_exp, HScalar, UnitTag};
use crate::repr::{parabolic_rep, sb_elliptic, sb_hyperbolic, CharacterParams};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Gaussian,
    Rational,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Quadrature,
}

type RealFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type RealFn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Product factorisation v(q, p) = qf(q) pf(p); all built-in state kinds
/// have one. It backs the fast 1D quadrature paths of the measurements.
#[derive(Clone)]
struct ProductParts {
    qf: RealFn1,
    pf: RealFn1,
    pf_d: RealFn1,
    q_range: (f64, f64),
    p_range: (f64, f64),
}

/// A state on the phase plane: evaluator, analytic partial derivatives, and
/// (where known) the analytic partial transform p -> x.
#[derive(Clone)]
pub struct StateFunction {
    pub kind: StateKind,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
    eval: RealFn2,
    dq: RealFn2,
    dp: RealFn2,
    /// (q-halfwidth, p-halfwidth) of the quadrature box around the means.
    half_widths: (f64, f64),
    /// Exact support rectangle (q_lo, q_hi, p_lo, p_hi), for bump states.
    pub support: Option<(f64, f64, f64, f64)>,
    has_analytic_transform: bool,
    product: Option<ProductParts>,
}

impl StateFunction {
    /// Normalised Gaussian
    /// (2/sqrt(hbar)) exp(-(2 pi w m/hbar)(q-a)^2 - (2 pi/(hbar w m))(p-b)^2).
    pub fn gaussian(a: f64, b: f64, m: f64, omega: f64, hbar: f64) -> Self {
        let alpha = 2.0 * PI * omega * m / hbar;
        let beta = 2.0 * PI / (hbar * omega * m);
        let norm = 2.0 / hbar.sqrt();
        let val = move |q: f64, p: f64| {
            norm * (-alpha * (q - a).powi(2) - beta * (p - b).powi(2)).exp()
        };
        let dq = move |q: f64, p: f64| -2.0 * alpha * (q - a) * val(q, p);
        let dp = move |q: f64, p: f64| -2.0 * beta * (p - b) * val(q, p);
        // 6 sigma in each direction
        let hw = (6.0 / (2.0 * alpha).sqrt(), 6.0 / (2.0 * beta).sqrt());
        let product = ProductParts {
            qf: Arc::new(move |q: f64| norm * (-alpha * (q - a).powi(2)).exp()),
            pf: Arc::new(move |p: f64| (-beta * (p - b).powi(2)).exp()),
            pf_d: Arc::new(move |p: f64| -2.0 * beta * (p - b) * (-beta * (p - b).powi(2)).exp()),
            q_range: (a - hw.0, a + hw.0),
            p_range: (b - hw.1, b + hw.1),
        };
        StateFunction {
            kind: StateKind::Gaussian,
            a,
            b,
            m,
            omega,
            hbar,
            eval: Arc::new(val),
            dq: Arc::new(dq),
            dp: Arc::new(dp),
            half_widths: hw,
            support: None,
            has_analytic_transform: true,
            product: Some(product),
        }
    }

    /// Normalised heavy-tailed state
    /// (2/(pi sqrt(hbar))) hbar^2 / (((q-a)^2 + hbar/(w m))((p-b)^2 + hbar w m)).
    pub fn rational(a: f64, b: f64, m: f64, omega: f64, hbar: f64) -> Self {
        let gq2 = hbar / (omega * m);
        let gp2 = hbar * omega * m;
        let norm = 2.0 / (PI * hbar.sqrt());
        let val = move |q: f64, p: f64| {
            norm * hbar * hbar / (((q - a).powi(2) + gq2) * ((p - b).powi(2) + gp2))
        };
        let dq = move |q: f64, p: f64| -2.0 * (q - a) / ((q - a).powi(2) + gq2) * val(q, p);
        let dp = move |q: f64, p: f64| -2.0 * (p - b) / ((p - b).powi(2) + gp2) * val(q, p);
        let hw = (60.0 * gq2.sqrt(), 60.0 * gp2.sqrt());
        let product = ProductParts {
            qf: Arc::new(move |q: f64| norm * hbar * hbar / ((q - a).powi(2) + gq2)),
            pf: Arc::new(move |p: f64| 1.0 / ((p - b).powi(2) + gp2)),
            pf_d: Arc::new(move |p: f64| -2.0 * (p - b) / ((p - b).powi(2) + gp2).powi(2)),
            q_range: (a - hw.0, a + hw.0),
            p_range: (b - hw.1, b + hw.1),
        };
        StateFunction {
            kind: StateKind::Rational,
            a,
            b,
            m,
            omega,
            hbar,
            eval: Arc::new(val),
            dq: Arc::new(dq),
            dp: Arc::new(dp),
            half_widths: hw,
            support: None,
            has_analytic_transform: true,
            product: Some(product),
        }
    }

    /// Normalised C^1 bump supported on [a - rq, a + rq] x [b - rp, b + rp];
    /// the workhorse for the parabolic disjoint-support experiments.
    pub fn bump(a: f64, b: f64, rq: f64, rp: f64, m: f64, omega: f64, hbar: f64) -> Self {
        // || (1-u^2)^2 (1-v^2)^2 ||_{L^2}^2 = rq rp (256/315)^2
        let norm = (315.0 / 256.0) / (rq * rp).sqrt();
        let val = move |q: f64, p: f64| {
            let u = (q - a) / rq;
            let v = (p - b) / rp;
            if u.abs() < 1.0 && v.abs() < 1.0 {
                norm * (1.0 - u * u).powi(2) * (1.0 - v * v).powi(2)
            } else {
                0.0
            }
        };
        let dq = move |q: f64, p: f64| {
            let u = (q - a) / rq;
            let v = (p - b) / rp;
            if u.abs() < 1.0 && v.abs() < 1.0 {
                norm * (-4.0 * u / rq) * (1.0 - u * u) * (1.0 - v * v).powi(2)
            } else {
                0.0
            }
        };
        let dp = move |q: f64, p: f64| {
            let u = (q - a) / rq;
            let v = (p - b) / rp;
            if u.abs() < 1.0 && v.abs() < 1.0 {
                norm * (1.0 - u * u).powi(2) * (-4.0 * v / rp) * (1.0 - v * v)
            } else {
                0.0
            }
        };
        let product = ProductParts {
            qf: Arc::new(move |q: f64| {
                let u = (q - a) / rq;
                if u.abs() < 1.0 {
                    norm * (1.0 - u * u).powi(2)
                } else {
                    0.0
                }
            }),
            pf: Arc::new(move |p: f64| {
                let v = (p - b) / rp;
                if v.abs() < 1.0 {
                    (1.0 - v * v).powi(2)
                } else {
                    0.0
                }
            }),
            pf_d: Arc::new(move |p: f64| {
                let v = (p - b) / rp;
                if v.abs() < 1.0 {
                    (-4.0 * v / rp) * (1.0 - v * v)
                } else {
                    0.0
                }
            }),
            q_range: (a - rq, a + rq),
            p_range: (b - rp, b + rp),
        };
        StateFunction {
            kind: StateKind::Custom,
            a,
            b,
            m,
            omega,
            hbar,
            eval: Arc::new(val),
            dq: Arc::new(dq),
            dp: Arc::new(dp),
            half_widths: (rq, rp),
            support: Some((a - rq, a + rq, b - rp, b + rp)),
            has_analytic_transform: false,
            product: Some(product),
        }
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        (self.eval)(q, p)
    }

    /// Quadrature box of the state (means +- half-widths).
    pub fn quad_box(&self) -> (f64, f64, f64, f64) {
        (
            self.a - self.half_widths.0,
            self.a + self.half_widths.0,
            self.b - self.half_widths.1,
            self.b + self.half_widths.1,
        )
    }

    /// View as a phase-space handle of the given scalar kind, carrying the
    /// analytic first derivatives (second derivatives fall back to finite
    /// differences when a representation asks for them).
    pub fn to_phase_fn(&self, kind: ValueKind) -> PhaseFn {
        let e = self.eval.clone();
        let dq = self.dq.clone();
        let dp = self.dp.clone();
        let f = PhaseFn::new1(kind, move |q, p| HScalar::real(e(q, p)));
        let fq = PhaseFn::new1(kind, move |q, p| HScalar::real(dq(q, p))).with_finite_diff(1e-3);
        let fp = PhaseFn::new1(kind, move |q, p| HScalar::real(dp(q, p))).with_finite_diff(1e-3);
        f.with_analytic_derivs(vec![fq], vec![fp])
    }

    /// Partial transform p -> x at (q, xi) with the elliptic kernel
    /// e^{-2 pi i p xi}: analytic for Gaussian and rational states, numeric
    /// for custom ones.
    pub fn transform_at(&self, q: f64, xi: f64) -> HScalar {
        match self.kind {
            StateKind::Gaussian => {
                let alpha = 2.0 * PI * self.omega * self.m / self.hbar;
                let beta = 2.0 * PI / (self.hbar * self.omega * self.m);
                let norm = 2.0 / self.hbar.sqrt();
                let amp = norm
                    * (PI / beta).sqrt()
                    * (-alpha * (q - self.a).powi(2) - PI * PI * xi * xi / beta).exp();
                char_exp(UnitTag::Elliptic, -2.0 * PI * self.b * xi).scale(amp)
            }
            StateKind::Rational => {
                let gq2 = self.hbar / (self.omega * self.m);
                let gp = (self.hbar * self.omega * self.m).sqrt();
                let norm = 2.0 / (PI * self.hbar.sqrt());
                let amp = norm * self.hbar * self.hbar / ((q - self.a).powi(2) + gq2)
                    * (PI / gp)
                    * (-2.0 * PI * gp * xi.abs()).exp();
                char_exp(UnitTag::Elliptic, -2.0 * PI * self.b * xi).scale(amp)
            }
            StateKind::Custom => {
                let (_, _, p_lo, p_hi) = self.quad_box();
                let n = 800;
                let dp = (p_hi - p_lo) / n as f64;
                let mut acc = HScalar::ZERO;
                for k in 0..=n {
                    let p = p_lo + k as f64 * dp;
                    let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                    acc = acc
                        + char_exp(UnitTag::Elliptic, -2.0 * PI * p * xi)
                            .scale(w * self.eval(q, p));
                }
                acc.scale(dp)
            }
        }
    }

    /// Hyperbolic continuation of [`transform_at`]: same envelopes, the
    /// character phase e^{-2 pi i b xi} replaced by its hyperbolic version.
    pub fn transform_at_hyperbolic(&self, q: f64, xi: f64) -> Result<HScalar> {
        if !self.has_analytic_transform {
            return Err(CoreError::MissingTransform);
        }
        let modulus = match self.kind {
            StateKind::Gaussian => {
                let alpha = 2.0 * PI * self.omega * self.m / self.hbar;
                let beta = 2.0 * PI / (self.hbar * self.omega * self.m);
                (2.0 / self.hbar.sqrt())
                    * (PI / beta).sqrt()
                    * (-alpha * (q - self.a).powi(2) - PI * PI * xi * xi / beta).exp()
            }
            StateKind::Rational => {
                let gq2 = self.hbar / (self.omega * self.m);
                let gp = (self.hbar * self.omega * self.m).sqrt();
                (2.0 / (PI * self.hbar.sqrt())) * self.hbar * self.hbar
                    / ((q - self.a).powi(2) + gq2)
                    * (PI / gp)
                    * (-2.0 * PI * gp * xi.abs()).exp()
            }
            StateKind::Custom => unreachable!(),
        };
        Ok(char_exp(UnitTag::Hyperbolic, -2.0 * PI * self.b * xi).scale(modulus))
    }
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

#[derive(Clone)]
enum KernelStates {
    Single(StateFunction),
    /// Sum of the two cross terms <v1, rho(g) v2> + <v2, rho(g) v1>.
    CrossSum(StateFunction, StateFunction),
    /// Full kernel of v1 + v2 (all four terms).
    Superposition(StateFunction, StateFunction),
    Opaque,
}

/// Reduced kernel profile conj(L(x, 0)) on an x-grid, cached for the direct
/// measurement path; l(s, x, y) = chi(s) L(x, y).
struct ReducedProfile {
    xs: Vec<f64>,
    vals: Vec<HScalar>,
    dx: f64,
}

/// The state functional l(g) = <v, rho(g) v> as an evaluable kernel.
#[derive(Clone)]
pub struct StateKernel {
    pub unit: UnitTag,
    pub params: CharacterParams,
    pub provenance: Provenance,
    eval: Arc<dyn Fn(&GroupElement) -> HScalar + Send + Sync>,
    states: KernelStates,
    profile: Arc<OnceLock<Arc<ReducedProfile>>>,
}

impl StateKernel {
    pub fn eval(&self, g: &GroupElement) -> HScalar {
        (self.eval)(g)
    }

    /// Wrap a raw kernel evaluator. Such kernels can be evaluated and used
    /// in interference coefficients but carry no state information, so
    /// position measurements on them fail with a missing-transform error.
    pub fn from_fn<F>(unit: UnitTag, params: CharacterParams, provenance: Provenance, f: F) -> Self
    where
        F: Fn(&GroupElement) -> HScalar + Send + Sync + 'static,
    {
        StateKernel::new(unit, params, provenance, KernelStates::Opaque, Arc::new(f))
    }

    fn new(
        unit: UnitTag,
        params: CharacterParams,
        provenance: Provenance,
        states: KernelStates,
        eval: Arc<dyn Fn(&GroupElement) -> HScalar + Send + Sync>,
    ) -> Self {
        StateKernel { unit, params, provenance, eval, states, profile: Arc::new(OnceLock::new()) }
    }
}

const KERNEL_QUAD_N: usize = 240;

/// <v1, rho(g) v2> by trapezoid quadrature over the union of the states'
/// boxes (extended by the representation's argument shifts).
fn pair_term_quad(
    v1: &StateFunction,
    v2: &StateFunction,
    unit: UnitTag,
    params: &CharacterParams,
    g: &GroupElement,
) -> HScalar {
    let f2 = match unit {
        UnitTag::Elliptic => v2.to_phase_fn(ValueKind::Complex),
        UnitTag::Hyperbolic => v2.to_phase_fn(ValueKind::Double),
        UnitTag::Parabolic => v2.to_phase_fn(ValueKind::CAlgebra),
    };
    let rho = match unit {
        UnitTag::Elliptic => sb_elliptic(g, params, &f2),
        UnitTag::Hyperbolic => sb_hyperbolic(g, params, &f2),
        UnitTag::Parabolic => parabolic_rep(g, params, &f2),
    }
    .expect("state kernel: representation construction");

    let (q1l, q1h, p1l, p1h) = v1.quad_box();
    let (q2l, q2h, p2l, p2h) = v2.quad_box();
    // argument shifts of the phase-space actions
    let shift = match unit {
        UnitTag::Elliptic => 0.5 * params.hbar,
        UnitTag::Hyperbolic => 0.5 * params.h(),
        UnitTag::Parabolic => 0.0,
    };
    let mq = shift * g.y[0].abs();
    let mp = shift * g.x[0].abs();
    let (qlo, qhi) = (q1l.min(q2l - mq) - mq, q1h.max(q2h + mq) + mq);
    let (plo, phi) = (p1l.min(p2l - mp) - mp, p1h.max(p2h + mp) + mp);
    let n = KERNEL_QUAD_N;
    let dq = (qhi - qlo) / n as f64;
    let dp = (phi - plo) / n as f64;
    let rows: Vec<HScalar> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let q = qlo + i as f64 * dq;
            let wi = if i == 0 || i == n { 0.5 } else { 1.0 };
            let mut acc = HScalar::ZERO;
            for j in 0..=n {
                let p = plo + j as f64 * dp;
                let w = wi * if j == 0 || j == n { 0.5 } else { 1.0 };
                let v1v = v1.eval(q, p);
                if v1v == 0.0 {
                    continue;
                }
                acc = acc + rho.eval1(q, p).conj().scale(w * v1v);
            }
            acc
        })
        .collect();
    let mut acc = HScalar::ZERO;
    for r in rows {
        acc = acc + r;
    }
    acc.scale(dq * dp)
}

/// Kernel of a single state, evaluated by phase-space quadrature.
pub fn state_kernel(
    v: &StateFunction,
    unit: UnitTag,
    params: &CharacterParams,
) -> Result<StateKernel> {
    let v1 = v.clone();
    let v2 = v.clone();
    let params_c = *params;
    let eval = Arc::new(move |g: &GroupElement| pair_term_quad(&v1, &v2, unit, &params_c, g));
    Ok(StateKernel::new(unit, *params, Provenance::Quadrature, KernelStates::Single(v.clone()), eval))
}

/// Closed-form elliptic Gaussian kernel
/// l(g) = e^{2 pi i (hbar s + x a + y b)} e^{-(pi hbar/(2 w m)) x^2 - (pi w m hbar/2) y^2}
/// for the unit-normalised Gaussian state.
pub fn elliptic_gaussian_kernel_closed(v: &StateFunction, params: &CharacterParams) -> StateKernel {
    let cross = elliptic_gaussian_cross_closed_fn(v, v, params);
    let eval = Arc::new(move |g: &GroupElement| cross(g));
    StateKernel::new(
        UnitTag::Elliptic,
        *params,
        Provenance::ClosedForm,
        KernelStates::Single(v.clone()),
        eval,
    )
}

/// Closed form of the pair term <v1, rho(g) v2> for two elliptic Gaussian
/// states with equal (m, omega, hbar) and means (a, b), (a2, b2).
fn elliptic_gaussian_cross_closed_fn(
    v1: &StateFunction,
    v2: &StateFunction,
    params: &CharacterParams,
) -> impl Fn(&GroupElement) -> HScalar {
    let (a, b, a2, b2) = (v1.a, v1.b, v2.a, v2.b);
    let (m, w, hbar) = (v1.m, v1.omega, params.hbar);
    let alpha = 2.0 * PI * w * m / hbar;
    let beta = 2.0 * PI / (hbar * w * m);
    move |g: &GroupElement| {
        let (s, x, y) = (g.s, g.x[0], g.y[0]);
        let phase = 2.0 * PI * hbar * s
            + PI * (x * (a + a2 + 0.5 * hbar * y) + y * (b + b2 - 0.5 * hbar * x));
        let env = -(alpha / 2.0) * (a - a2 - 0.5 * hbar * y).powi(2)
            - (beta / 2.0) * (b - b2 + 0.5 * hbar * x).powi(2)
            - PI * PI * x * x / (2.0 * alpha)
            - PI * PI * y * y / (2.0 * beta);
        char_exp(UnitTag::Elliptic, phase).scale(env.exp())
    }
}

/// Closed-form hyperbolic Gaussian kernel for the phase-space action with
/// shifts H/2: cosh/sinh phase in theta = H s + x a + y b over a real
/// Gaussian envelope (H = 2 pi hbar).
pub fn hyperbolic_gaussian_kernel_closed(v: &StateFunction, params: &CharacterParams) -> StateKernel {
    let cross = hyperbolic_gaussian_cross_closed_fn(v, v, params);
    let eval = Arc::new(move |g: &GroupElement| cross(g));
    StateKernel::new(
        UnitTag::Hyperbolic,
        *params,
        Provenance::ClosedForm,
        KernelStates::Single(v.clone()),
        eval,
    )
}

fn hyperbolic_gaussian_cross_closed_fn(
    v1: &StateFunction,
    v2: &StateFunction,
    params: &CharacterParams,
) -> impl Fn(&GroupElement) -> HScalar {
    let (a, b, a2, b2) = (v1.a, v1.b, v2.a, v2.b);
    let (m, w, hbar) = (v1.m, v1.omega, params.hbar);
    let ch = 2.0 * PI * hbar;
    let alpha = 2.0 * PI * w * m / hbar;
    let beta = 2.0 * PI / (hbar * w * m);
    move |g: &GroupElement| {
        let (s, x, y) = (g.s, g.x[0], g.y[0]);
        let theta = ch * s
            + 0.5 * x * (a + a2 + 0.5 * ch * y)
            + 0.5 * y * (b + b2 - 0.5 * ch * x);
        let env = -(alpha / 2.0) * (a - a2 - 0.5 * ch * y).powi(2)
            - (beta / 2.0) * (b - b2 + 0.5 * ch * x).powi(2)
            + x * x / (8.0 * alpha)
            + y * y / (8.0 * beta);
        char_exp(UnitTag::Hyperbolic, theta).scale(env.exp())
    }
}

/// Kernel of the sum of the two cross terms,
/// <v1, rho(g) v2> + <v2, rho(g) v1>, by quadrature.
pub fn cross_term_kernel(
    v1: &StateFunction,
    v2: &StateFunction,
    unit: UnitTag,
    params: &CharacterParams,
) -> Result<StateKernel> {
    let (va, vb) = (v1.clone(), v2.clone());
    let params_c = *params;
    let eval = Arc::new(move |g: &GroupElement| {
        pair_term_quad(&va, &vb, unit, &params_c, g) + pair_term_quad(&vb, &va, unit, &params_c, g)
    });
    Ok(StateKernel::new(
        unit,
        *params,
        Provenance::Quadrature,
        KernelStates::CrossSum(v1.clone(), v2.clone()),
        eval,
    ))
}

/// Full kernel of the superposition v1 + v2: the four-term expansion
/// l1 + l2 + <v1, rho(g) v2> + <v2, rho(g) v1>.
pub fn cross_kernel(
    v1: &StateFunction,
    v2: &StateFunction,
    unit: UnitTag,
    params: &CharacterParams,
) -> Result<StateKernel> {
    let (va, vb) = (v1.clone(), v2.clone());
    let params_c = *params;
    let eval = Arc::new(move |g: &GroupElement| {
        pair_term_quad(&va, &va, unit, &params_c, g)
            + pair_term_quad(&vb, &vb, unit, &params_c, g)
            + pair_term_quad(&va, &vb, unit, &params_c, g)
            + pair_term_quad(&vb, &va, unit, &params_c, g)
    });
    Ok(StateKernel::new(
        unit,
        *params,
        Provenance::Quadrature,
        KernelStates::Superposition(v1.clone(), v2.clone()),
        eval,
    ))
}

// ---------------------------------------------------------------------------
// Measurements
// ---------------------------------------------------------------------------

/// The observable registering a particle at position c; on the group it is
/// the kernel e^{2 pi i (s hbar + x c)} delta(y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionObservable {
    pub c: f64,
    pub hbar: f64,
}

/// Result of a measurement with the non-real components kept for
/// diagnostics: `value` is the real part, `p_value`/`ip_value` the dual
/// components (parabolic case), `h_value` the split-complex component
/// (hyperbolic case), `residue` the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub value: f64,
    pub p_value: f64,
    pub ip_value: f64,
    pub h_value: f64,
    pub residue: f64,
}

const MEASURE_RESIDUE_TOL: f64 = 1e-9;

fn measure_q_range(states: &[&StateFunction], c_abs_max: f64) -> (f64, f64, usize) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in states {
        let (ql, qh, _, _) = v.quad_box();
        lo = lo.min(ql);
        hi = hi.max(qh);
    }
    let lo = lo.min(-c_abs_max - 4.0);
    let hi = hi.max(c_abs_max + 4.0);
    // resolution fine enough for the oscillatory factors of the defaults
    let n = (((hi - lo) / 0.0025).ceil() as usize).clamp(4000, 40000);
    (lo, hi, n)
}

/// Fast pairing (2/hbar) int conj(u1^(q, xi)) u2^(q, xi) dq at xi = 2(q-c)/hbar
/// with the elliptic transforms.
fn fast_pair_elliptic(v1: &StateFunction, v2: &StateFunction, c: f64, hbar: f64) -> HScalar {
    let (lo, hi, n) = measure_q_range(&[v1, v2], c.abs());
    let dq = (hi - lo) / n as f64;
    let mut acc = HScalar::ZERO;
    for k in 0..=n {
        let q = lo + k as f64 * dq;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let xi = 2.0 * (q - c) / hbar;
        let t = v1.transform_at(q, xi).conj() * v2.transform_at(q, xi);
        acc = acc + t.scale(w);
    }
    acc.scale(2.0 * dq / hbar)
}

/// Hyperbolic analogue of [`fast_pair_elliptic`] using the continued
/// transforms; the conjugation flips h.
fn fast_pair_hyperbolic(
    v1: &StateFunction,
    v2: &StateFunction,
    c: f64,
    hbar: f64,
) -> Result<HScalar> {
    let (lo, hi, n) = measure_q_range(&[v1, v2], c.abs());
    let dq = (hi - lo) / n as f64;
    let mut acc = HScalar::double(0.0, 0.0);
    for k in 0..=n {
        let q = lo + k as f64 * dq;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let xi = 2.0 * (q - c) / hbar;
        let t = v1.transform_at_hyperbolic(q, xi)?.conj() * v2.transform_at_hyperbolic(q, xi)?;
        acc = acc + t.scale(w);
    }
    Ok(acc.scale(2.0 * dq / hbar))
}

/// 1D trapezoid quadrature of f over [lo, hi].
fn quad1(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let d = (hi - lo) / n as f64;
    let mut acc = 0.5 * (f(lo) + f(hi));
    for k in 1..n {
        acc += f(lo + k as f64 * d);
    }
    acc * d
}

const PROFILE_QUAD_N: usize = 3000;

/// Exact reduced-kernel section of one pair term along g = (0, x, 0):
/// L_12(x, 0) for product states, via two 1D quadratures.
///
/// Elliptic:  L(x,0) = F(x) G(hbar x/2), with F the e^{+2 pi i q x} transform
///            of qf1 qf2 and G(u) the p-correlation of pf1 against pf2(.+u).
/// Parabolic: L(x,0) = F(x) (A + ip (H x/(4 pi)) B) with A = int pf1 pf2 and
///            B = int pf1 pf2'; the action never shifts supports, so
///            disjoint slits give an identically zero profile.
fn pair_profile_product(
    v1: &StateFunction,
    v2: &StateFunction,
    unit: UnitTag,
    params: &CharacterParams,
    xs: &[f64],
) -> Option<Vec<HScalar>> {
    let pr1 = v1.product.as_ref()?;
    let pr2 = v2.product.as_ref()?;
    let (q_lo, q_hi) = (pr1.q_range.0.min(pr2.q_range.0), pr1.q_range.1.max(pr2.q_range.1));
    let (p_lo, p_hi) = (pr1.p_range.0.min(pr2.p_range.0), pr1.p_range.1.max(pr2.p_range.1));
    let n = PROFILE_QUAD_N;
    let ftrans = |x: f64| -> HScalar {
        let d = (q_hi - q_lo) / n as f64;
        let mut acc = HScalar::ZERO;
        for k in 0..=n {
            let q = q_lo + k as f64 * d;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            let v = (pr1.qf)(q) * (pr2.qf)(q);
            if v != 0.0 {
                acc = acc + char_exp(UnitTag::Elliptic, 2.0 * PI * q * x).scale(w * v);
            }
        }
        acc.scale(d)
    };
    match unit {
        UnitTag::Elliptic => {
            let hbar = params.hbar;
            let vals = xs
                .par_iter()
                .map(|&x| {
                    let g = quad1(p_lo, p_hi, n, |p| (pr1.pf)(p) * (pr2.pf)(p + 0.5 * hbar * x));
                    ftrans(x).scale(g)
                })
                .collect();
            Some(vals)
        }
        UnitTag::Parabolic => {
            let ch = params.h();
            let a = quad1(p_lo, p_hi, n, |p| (pr1.pf)(p) * (pr2.pf)(p));
            let b = quad1(p_lo, p_hi, n, |p| (pr1.pf)(p) * (pr2.pf_d)(p));
            let vals = xs
                .par_iter()
                .map(|&x| {
                    // conj of the action applied to v2 carries -ip(Hx/4pi) d/dp
                    let coeff = HScalar::real(a)
                        + HScalar::c4(0.0, 0.0, 0.0, -ch * x / (4.0 * PI)).scale(b);
                    ftrans(x) * coeff
                })
                .collect();
            Some(vals)
        }
        UnitTag::Hyperbolic => None,
    }
}

/// Reduced-profile path: cache conj(L(x, 0)) on an x-grid, where
/// l(s, x, y) = chi(s) L(x, y); each measurement is then a 1D pairing
/// against e^{2 pi i x c}. Used for custom states and the parabolic unit.
fn reduced_profile(k: &StateKernel) -> Result<Arc<ReducedProfile>> {
    if let Some(p) = k.profile.get() {
        return Ok(p.clone());
    }
    let pairs: Vec<(&StateFunction, &StateFunction)> = match &k.states {
        KernelStates::Single(v) => vec![(v, v)],
        KernelStates::CrossSum(v1, v2) => vec![(v1, v2), (v2, v1)],
        KernelStates::Superposition(v1, v2) => vec![(v1, v1), (v2, v2), (v1, v2), (v2, v1)],
        KernelStates::Opaque => return Err(CoreError::MissingTransform),
    };
    // x-extent: elliptic profiles are cut off by the shifted p-correlation,
    // parabolic ones decay like the transform of the q-marginal product
    let xmax = pairs
        .iter()
        .map(|(v1, v2)| match k.unit {
            UnitTag::Elliptic => {
                2.0 * ((v1.b - v2.b).abs() + v1.half_widths.1 + v2.half_widths.1)
                    / k.params.hbar
                    + 2.0
            }
            _ => 60.0 / v1.half_widths.0.min(v2.half_widths.0).max(0.05),
        })
        .fold(8.0f64, f64::max)
        .min(600.0);
    let n = ((2.0 * xmax / 0.004).ceil() as usize).clamp(4096, 65536);
    let dx = 2.0 * xmax / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| -xmax + i as f64 * dx).collect();
    let mut vals = vec![HScalar::ZERO; xs.len()];
    for (v1, v2) in pairs {
        let part = match pair_profile_product(v1, v2, k.unit, &k.params, &xs) {
            Some(p) => p,
            None => {
                // generic fallback: evaluate the kernel itself (slow)
                xs.par_iter()
                    .map(|&x| {
                        let g = GroupElement::new1(0.0, x, 0.0);
                        pair_term_quad(v1, v2, k.unit, &k.params, &g)
                    })
                    .collect()
            }
        };
        for (acc, v) in vals.iter_mut().zip(part) {
            *acc = *acc + v;
        }
    }
    let vals: Vec<HScalar> = vals.into_iter().map(|v| v.conj()).collect();
    let prof = Arc::new(ReducedProfile { xs, vals, dx });
    let _ = k.profile.set(prof.clone());
    Ok(k.profile.get().unwrap().clone())
}

fn measure_via_profile(k: &StateKernel, c: f64) -> Result<Measurement> {
    let prof = reduced_profile(k)?;
    let last = prof.xs.len() - 1;
    let mut acc = HScalar::ZERO;
    for (i, (x, v)) in prof.xs.iter().zip(prof.vals.iter()).enumerate() {
        if *v == HScalar::ZERO {
            continue;
        }
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        acc = acc + (char_exp(UnitTag::Elliptic, 2.0 * PI * x * c) * *v).scale(w);
    }
    acc = acc.scale(prof.dx);
    Ok(split_measurement(acc))
}

fn split_measurement(v: HScalar) -> Measurement {
    match v.as_c() {
        Some((re, im, im_p, im_ip)) => {
            Measurement { value: re, p_value: im_p, ip_value: im_ip, h_value: 0.0, residue: im }
        }
        None => {
            let (re, h) = v.as_double().unwrap();
            Measurement { value: re, p_value: 0.0, ip_value: 0.0, h_value: h, residue: 0.0 }
        }
    }
}

/// Measure the position observable on a state kernel; returns the full
/// component breakdown. See [`measure_position`] for the plain real value.
pub fn measure_position_full(x_obs: &PositionObservable, l: &StateKernel) -> Result<Measurement> {
    let c = x_obs.c;
    let hbar = x_obs.hbar;
    match (&l.states, l.unit) {
        (KernelStates::Opaque, _) => Err(CoreError::MissingTransform),
        (_, UnitTag::Parabolic) => measure_via_profile(l, c),
        (KernelStates::Single(v), UnitTag::Elliptic) => {
            if v.has_analytic_transform {
                Ok(split_measurement(fast_pair_elliptic(v, v, c, hbar)))
            } else {
                measure_via_profile(l, c)
            }
        }
        (KernelStates::Single(v), UnitTag::Hyperbolic) => {
            Ok(split_measurement(fast_pair_hyperbolic(v, v, c, hbar)?))
        }
        (KernelStates::CrossSum(v1, v2), UnitTag::Elliptic) => {
            if v1.has_analytic_transform && v2.has_analytic_transform {
                let m = fast_pair_elliptic(v1, v2, c, hbar);
                // the second cross term contributes the conjugate
                Ok(split_measurement(m + m.conj()))
            } else {
                measure_via_profile(l, c)
            }
        }
        (KernelStates::CrossSum(v1, v2), UnitTag::Hyperbolic) => {
            let m = fast_pair_hyperbolic(v1, v2, c, hbar)?;
            Ok(split_measurement(m + m.conj()))
        }
        (KernelStates::Superposition(v1, v2), unit) => {
            if unit == UnitTag::Elliptic && !(v1.has_analytic_transform && v2.has_analytic_transform)
            {
                return measure_via_profile(l, c);
            }
            let single = |v: &StateFunction| -> Result<HScalar> {
                match unit {
                    UnitTag::Elliptic => Ok(fast_pair_elliptic(v, v, c, hbar)),
                    UnitTag::Hyperbolic => fast_pair_hyperbolic(v, v, c, hbar),
                    UnitTag::Parabolic => unreachable!(),
                }
            };
            let cross = match unit {
                UnitTag::Elliptic => {
                    let m = fast_pair_elliptic(v1, v2, c, hbar);
                    m + m.conj()
                }
                UnitTag::Hyperbolic => {
                    let m = fast_pair_hyperbolic(v1, v2, c, hbar)?;
                    m + m.conj()
                }
                UnitTag::Parabolic => unreachable!(),
            };
            Ok(split_measurement(single(v1)? + single(v2)? + cross))
        }
    }
}

/// Real position-measurement value; the imaginary residue is asserted to be
/// below 1e-9 relative and discarded.
pub fn measure_position(x_obs: &PositionObservable, l: &StateKernel) -> Result<f64> {
    let m = measure_position_full(x_obs, l)?;
    let scale = 1.0 + m.value.abs();
    if m.residue.abs() > MEASURE_RESIDUE_TOL * scale {
        return Err(CoreError::ResidueTooLarge(m.residue.abs(), MEASURE_RESIDUE_TOL * scale));
    }
    Ok(m.value)
}

// ---------------------------------------------------------------------------
// Two-slit curves and the interference coefficient
// ---------------------------------------------------------------------------

/// Measurement curves of a two-slit experiment over a detector grid.
#[derive(Debug, Clone)]
pub struct TwoSlitCurve {
    pub c: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// Addition of probabilities without interaction, P1 + P2.
    pub p_sum: Vec<f64>,
    /// Measurement of the full superposition kernel.
    pub p_full: Vec<f64>,
    /// Dual components of the full measurement (parabolic diagnostics).
    pub p_dual: Vec<f64>,
}

impl TwoSlitCurve {
    /// The interference term P_full - P_sum.
    pub fn interference(&self) -> Vec<f64> {
        self.p_full.iter().zip(&self.p_sum).map(|(f, s)| f - s).collect()
    }

    /// Pointwise interference coefficient A(c) = (P_full - P_sum)/(2 sqrt(P1 P2)).
    pub fn a_coefficient(&self) -> Vec<f64> {
        self.c
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let d = self.p_full[i] - self.p_sum[i];
                let den = 2.0 * (self.p1[i] * self.p2[i]).sqrt();
                if den > 0.0 {
                    d / den
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Count sign changes of the interference term, ignoring values below
    /// `floor` times its maximum magnitude.
    pub fn interference_sign_changes(&self, floor: f64) -> usize {
        count_sign_changes(&self.interference(), floor)
    }
}

pub fn count_sign_changes(vals: &[f64], floor: f64) -> usize {
    let maxab = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thresh = floor * maxab;
    let mut last = 0i8;
    let mut changes = 0;
    for &v in vals {
        if v.abs() <= thresh {
            continue;
        }
        let s = if v > 0.0 { 1 } else { -1 };
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Per-detector measurements of the separate slits and of their
/// superposition, for the given character.
pub fn two_slit_curve(
    v1: &StateFunction,
    v2: &StateFunction,
    unit: UnitTag,
    params: &CharacterParams,
    c_grid: &[f64],
) -> Result<TwoSlitCurve> {
    let l1 = state_kernel(v1, unit, params)?;
    let l2 = state_kernel(v2, unit, params)?;
    let lx = cross_term_kernel(v1, v2, unit, params)?;
    // warm the profile caches outside the parallel loop
    let profile_route = unit == UnitTag::Parabolic
        || (unit == UnitTag::Elliptic
            && !(v1.has_analytic_transform && v2.has_analytic_transform));
    if profile_route {
        reduced_profile(&l1)?;
        reduced_profile(&l2)?;
        reduced_profile(&lx)?;
    }
    let hbar = params.hbar;
    let rows: Result<Vec<(f64, f64, f64, f64)>> = c_grid
        .par_iter()
        .map(|&c| {
            let obs = PositionObservable { c, hbar };
            let m1 = measure_position_full(&obs, &l1)?;
            let m2 = measure_position_full(&obs, &l2)?;
            let mx = measure_position_full(&obs, &lx)?;
            Ok((m1.value, m2.value, mx.value, mx.p_value))
        })
        .collect();
    let rows = rows?;
    let mut curve = TwoSlitCurve {
        c: c_grid.to_vec(),
        p1: Vec::with_capacity(rows.len()),
        p2: Vec::with_capacity(rows.len()),
        p_sum: Vec::with_capacity(rows.len()),
        p_full: Vec::with_capacity(rows.len()),
        p_dual: Vec::with_capacity(rows.len()),
    };
    for (p1, p2, px, pd) in rows {
        curve.p1.push(p1);
        curve.p2.push(p2);
        curve.p_sum.push(p1 + p2);
        // assembled additively so an exactly-zero cross term leaves
        // P_full bitwise equal to P_sum
        curve.p_full.push(p1 + p2 + px);
        curve.p_dual.push(pd);
    }
    Ok(curve)
}

/// Interference coefficient A at a group point,
/// A = (l12 - l1 - l2) / (2 sqrt(l1 l2)), taken on the real components.
/// The elliptic bound |A| <= 1 holds for well-separated slits at pairing
/// points within the kernels' support; the hyperbolic coefficient exceeds 1.
pub fn interference_coefficient(
    l1: &StateKernel,
    l2: &StateKernel,
    l12: &StateKernel,
    g: &GroupElement,
) -> Result<f64> {
    let r1 = l1.eval(g);
    let r2 = l2.eval(g);
    let scale1 = 1.0 + r1.re().abs();
    if nonreal_part(&r1) > 1e-9 * scale1 || nonreal_part(&r2) > 1e-9 * (1.0 + r2.re().abs()) {
        return Err(CoreError::ResidueTooLarge(nonreal_part(&r1).max(nonreal_part(&r2)), 1e-9));
    }
    let (a1, a2) = (r1.re(), r2.re());
    if a1 <= 0.0 || a2 <= 0.0 {
        return Err(CoreError::NonpositiveKernel(a1.min(a2)));
    }
    let a12 = l12.eval(g).re();
    Ok((a12 - a1 - a2) / (2.0 * (a1 * a2).sqrt()))
}

fn nonreal_part(v: &HScalar) -> f64 {
    match v.as_c() {
        Some((_, im, im_p, im_ip)) => im.abs().max(im_p.abs()).max(im_ip.abs()),
        None => v.as_double().map(|(_, h)| h.abs()).unwrap_or(0.0),
    }
}

/// Closed-form interference coefficient along g = (0, x, 0) for the
/// symmetric Gaussian pair (0, b), (0, -b): A(x) = e^{-2 beta b^2} cosh(k b x)
/// with k = beta hbar (elliptic shifts) or k = beta H (hyperbolic shifts),
/// beta = 2 pi/(hbar w m).
pub fn gaussian_pair_a_closed(unit: UnitTag, m: f64, omega: f64, hbar: f64, b: f64, x: f64) -> f64 {
    let beta = 2.0 * PI / (hbar * omega * m);
    let k = match unit {
        UnitTag::Elliptic => beta * hbar,
        UnitTag::Hyperbolic => beta * 2.0 * PI * hbar,
        UnitTag::Parabolic => 0.0,
    };
    (-2.0 * beta * b * b).exp() * (k * b * x).cosh()
}

/// Superposition kernel assembled from closed forms (elliptic/hyperbolic
/// Gaussian pairs), for exact-arithmetic interference studies.
pub fn gaussian_superposition_kernel_closed(
    v1: &StateFunction,
    v2: &StateFunction,
    unit: UnitTag,
    params: &CharacterParams,
) -> Result<StateKernel> {
    match unit {
        UnitTag::Elliptic => {
            let t11 = elliptic_gaussian_cross_closed_fn(v1, v1, params);
            let t22 = elliptic_gaussian_cross_closed_fn(v2, v2, params);
            let t12 = elliptic_gaussian_cross_closed_fn(v1, v2, params);
            let t21 = elliptic_gaussian_cross_closed_fn(v2, v1, params);
            let eval =
                Arc::new(move |g: &GroupElement| t11(g) + t22(g) + t12(g) + t21(g));
            Ok(StateKernel::new(
                unit,
                *params,
                Provenance::ClosedForm,
                KernelStates::Superposition(v1.clone(), v2.clone()),
                eval,
            ))
        }
        UnitTag::Hyperbolic => {
            let t11 = hyperbolic_gaussian_cross_closed_fn(v1, v1, params);
            let t22 = hyperbolic_gaussian_cross_closed_fn(v2, v2, params);
            let t12 = hyperbolic_gaussian_cross_closed_fn(v1, v2, params);
            let t21 = hyperbolic_gaussian_cross_closed_fn(v2, v1, params);
            let eval =
                Arc::new(move |g: &GroupElement| t11(g) + t22(g) + t12(g) + t21(g));
            Ok(StateKernel::new(
                unit,
                *params,
                Provenance::ClosedForm,
                KernelStates::Superposition(v1.clone(), v2.clone()),
                eval,
            ))
        }
        UnitTag::Parabolic => Err(CoreError::UnsupportedKind {
            op: "gaussian_superposition_kernel_closed",
            kind: "parabolic",
        }),
    }
}

/// Check that l(g^{-1}) equals the conjugate of l(g), the Hermitian symmetry
/// of elliptic kernels.
pub fn hermitian_defect(l: &StateKernel, g: &GroupElement) -> f64 {
    let a = l.eval(&inverse(g));
    let b = l.eval(g).conj();
    (a - b).max_abs()
}
