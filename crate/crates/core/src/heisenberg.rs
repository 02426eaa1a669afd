//! The Heisenberg group H^n: elements, group law, symplectic form, left
//! shifts, and the Lie-algebra vector fields realised as finite-difference
//! operators on evaluable function handles.
//!
//! Functions are closures, not grids: shifts and character multiplications
//! compose exactly and quadrature only ever happens at the point of use.

use crate::error::{CoreError, Result};
use crate::hypercomplex::HScalar;
use std::sync::Arc;

/// A point (s, x, y) of H^n with x, y in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GroupElement {
    pub fn new(s: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(CoreError::DimensionMismatch(x.len(), y.len()));
        }
        if x.is_empty() {
            return Err(CoreError::DimensionMismatch(0, 1));
        }
        Ok(GroupElement { s, x, y })
    }

    /// One-dimensional element (s, x, y).
    pub fn new1(s: f64, x: f64, y: f64) -> Self {
        GroupElement { s, x: vec![x], y: vec![y] }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { s: 0.0, x: vec![0.0; n], y: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Symplectic form omega(x, y; x', y') = x.y' - x'.y on R^{2n}.
pub fn symplectic(x: &[f64], y: &[f64], xp: &[f64], yp: &[f64]) -> Result<f64> {
    let n = x.len();
    if y.len() != n || xp.len() != n || yp.len() != n {
        return Err(CoreError::DimensionMismatch(n, y.len().max(xp.len()).max(yp.len())));
    }
    let mut acc = 0.0;
    for j in 0..n {
        acc += x[j] * yp[j] - xp[j] * y[j];
    }
    Ok(acc)
}

/// Group law (s,x,y).(s',x',y') = (s + s' + omega(x,y;x',y')/2, x+x', y+y').
pub fn compose(g1: &GroupElement, g2: &GroupElement) -> Result<GroupElement> {
    if g1.n() != g2.n() {
        return Err(CoreError::DimensionMismatch(g1.n(), g2.n()));
    }
    let w = symplectic(&g1.x, &g1.y, &g2.x, &g2.y)?;
    let x = g1.x.iter().zip(&g2.x).map(|(a, b)| a + b).collect();
    let y = g1.y.iter().zip(&g2.y).map(|(a, b)| a + b).collect();
    Ok(GroupElement { s: g1.s + g2.s + 0.5 * w, x, y })
}

/// Group inverse (-s, -x, -y).
pub fn inverse(g: &GroupElement) -> GroupElement {
    GroupElement {
        s: -g.s,
        x: g.x.iter().map(|v| -v).collect(),
        y: g.y.iter().map(|v| -v).collect(),
    }
}

// ---------------------------------------------------------------------------
// Evaluable function handles
// ---------------------------------------------------------------------------

/// Declared scalar algebra of a function handle's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    /// Complex values (includes reals).
    Complex,
    /// Double (split-complex) values.
    Double,
    /// Values in the four-unit algebra C.
    CAlgebra,
}

impl ValueKind {
    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Complex => "complex",
            ValueKind::Double => "double",
            ValueKind::CAlgebra => "C",
        }
    }
}

/// How a handle obtains derivatives of itself.
pub enum DerivSpec<F> {
    /// No derivative available; requesting one is an error.
    None,
    /// Fourth-order central differences with the given step.
    FiniteDiff { step: f64 },
    /// Caller-supplied analytic partial derivatives, one handle per axis.
    Analytic(Vec<Arc<F>>),
    /// Lazily built derivative handle per axis. Lets composed handles
    /// (representation images) expose exact derivatives without eagerly
    /// constructing an infinite tower.
    Generator(Arc<dyn Fn(usize) -> Result<F> + Send + Sync>),
}

impl<F> Clone for DerivSpec<F> {
    fn clone(&self) -> Self {
        match self {
            DerivSpec::None => DerivSpec::None,
            DerivSpec::FiniteDiff { step } => DerivSpec::FiniteDiff { step: *step },
            DerivSpec::Analytic(v) => DerivSpec::Analytic(v.clone()),
            DerivSpec::Generator(g) => DerivSpec::Generator(g.clone()),
        }
    }
}

type GroupEval = Arc<dyn Fn(&GroupElement) -> HScalar + Send + Sync>;

/// Evaluable function on the group H^n.
#[derive(Clone)]
pub struct GroupFn {
    n: usize,
    kind: ValueKind,
    eval: GroupEval,
}

impl GroupFn {
    pub fn new<F>(n: usize, kind: ValueKind, f: F) -> Self
    where
        F: Fn(&GroupElement) -> HScalar + Send + Sync + 'static,
    {
        GroupFn { n, kind, eval: Arc::new(f) }
    }

    pub fn eval(&self, g: &GroupElement) -> HScalar {
        (self.eval)(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }
}

type PhaseEval = Arc<dyn Fn(&[f64], &[f64]) -> HScalar + Send + Sync>;

/// Evaluable function on phase space, arguments (q, p) in R^n x R^n.
#[derive(Clone)]
pub struct PhaseFn {
    n: usize,
    kind: ValueKind,
    eval: PhaseEval,
    deriv_q: DerivSpec<PhaseFn>,
    deriv_p: DerivSpec<PhaseFn>,
}

impl PhaseFn {
    pub fn new<F>(n: usize, kind: ValueKind, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> HScalar + Send + Sync + 'static,
    {
        PhaseFn { n, kind, eval: Arc::new(f), deriv_q: DerivSpec::None, deriv_p: DerivSpec::None }
    }

    /// Scalar convenience for n = 1.
    pub fn new1<F>(kind: ValueKind, f: F) -> Self
    where
        F: Fn(f64, f64) -> HScalar + Send + Sync + 'static,
    {
        PhaseFn::new(1, kind, move |q, p| f(q[0], p[0]))
    }

    pub fn with_analytic_derivs(mut self, dq: Vec<PhaseFn>, dp: Vec<PhaseFn>) -> Self {
        self.deriv_q = DerivSpec::Analytic(dq.into_iter().map(Arc::new).collect());
        self.deriv_p = DerivSpec::Analytic(dp.into_iter().map(Arc::new).collect());
        self
    }

    /// Opt in to finite-difference derivatives for handles without analytic
    /// ones.
    pub fn with_finite_diff(mut self, step: f64) -> Self {
        if !matches!(self.deriv_q, DerivSpec::Analytic(_)) {
            self.deriv_q = DerivSpec::FiniteDiff { step };
        }
        if !matches!(self.deriv_p, DerivSpec::Analytic(_)) {
            self.deriv_p = DerivSpec::FiniteDiff { step };
        }
        self
    }

    pub fn eval(&self, q: &[f64], p: &[f64]) -> HScalar {
        (self.eval)(q, p)
    }

    pub fn eval1(&self, q: f64, p: f64) -> HScalar {
        (self.eval)(&[q], &[p])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn with_deriv_generators<Gq, Gp>(mut self, dq: Gq, dp: Gp) -> Self
    where
        Gq: Fn(usize) -> Result<PhaseFn> + Send + Sync + 'static,
        Gp: Fn(usize) -> Result<PhaseFn> + Send + Sync + 'static,
    {
        self.deriv_q = DerivSpec::Generator(Arc::new(dq));
        self.deriv_p = DerivSpec::Generator(Arc::new(dp));
        self
    }

    /// Re-declare the scalar algebra of the values. The caller asserts the
    /// evaluator's values actually live in the new algebra (real-valued
    /// evaluators qualify for every kind).
    pub fn retag(mut self, kind: ValueKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn deriv_q(&self, axis: usize) -> Result<PhaseFn> {
        match &self.deriv_q {
            DerivSpec::Analytic(d) => Ok((*d[axis]).clone()),
            DerivSpec::FiniteDiff { step } => Ok(self.fd_axis(axis, *step, true)),
            DerivSpec::Generator(g) => g(axis),
            DerivSpec::None => Err(CoreError::MissingDerivative),
        }
    }

    pub fn deriv_p(&self, axis: usize) -> Result<PhaseFn> {
        match &self.deriv_p {
            DerivSpec::Analytic(d) => Ok((*d[axis]).clone()),
            DerivSpec::FiniteDiff { step } => Ok(self.fd_axis(axis, *step, false)),
            DerivSpec::Generator(g) => g(axis),
            DerivSpec::None => Err(CoreError::MissingDerivative),
        }
    }

    fn fd_axis(&self, axis: usize, step: f64, along_q: bool) -> PhaseFn {
        let inner = self.clone();
        let mut out = PhaseFn::new(self.n, self.kind, move |q, p| {
            let sample = |offset: f64| -> HScalar {
                let mut qb = q.to_vec();
                let mut pb = p.to_vec();
                if along_q {
                    qb[axis] += offset;
                } else {
                    pb[axis] += offset;
                }
                inner.eval(&qb, &pb)
            };
            // 4th-order central stencil
            let v = sample(-2.0 * step).scale(1.0)
                + sample(-step).scale(-8.0)
                + sample(step).scale(8.0)
                + sample(2.0 * step).scale(-1.0);
            v.scale(1.0 / (12.0 * step))
        });
        out.deriv_q = DerivSpec::FiniteDiff { step };
        out.deriv_p = DerivSpec::FiniteDiff { step };
        out
    }
}

type ConfigEval = Arc<dyn Fn(&[f64]) -> HScalar + Send + Sync>;

/// Evaluable function on configuration space R^n.
#[derive(Clone)]
pub struct ConfigFn {
    n: usize,
    kind: ValueKind,
    eval: ConfigEval,
    deriv: DerivSpec<ConfigFn>,
}

impl ConfigFn {
    pub fn new<F>(n: usize, kind: ValueKind, f: F) -> Self
    where
        F: Fn(&[f64]) -> HScalar + Send + Sync + 'static,
    {
        ConfigFn { n, kind, eval: Arc::new(f), deriv: DerivSpec::None }
    }

    pub fn new1<F>(kind: ValueKind, f: F) -> Self
    where
        F: Fn(f64) -> HScalar + Send + Sync + 'static,
    {
        ConfigFn::new(1, kind, move |x| f(x[0]))
    }

    pub fn with_analytic_derivs(mut self, dx: Vec<ConfigFn>) -> Self {
        self.deriv = DerivSpec::Analytic(dx.into_iter().map(Arc::new).collect());
        self
    }

    pub fn with_finite_diff(mut self, step: f64) -> Self {
        if !matches!(self.deriv, DerivSpec::Analytic(_)) {
            self.deriv = DerivSpec::FiniteDiff { step };
        }
        self
    }

    pub fn eval(&self, x: &[f64]) -> HScalar {
        (self.eval)(x)
    }

    pub fn eval1(&self, x: f64) -> HScalar {
        (self.eval)(&[x])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn with_deriv_generator<G>(mut self, dx: G) -> Self
    where
        G: Fn(usize) -> Result<ConfigFn> + Send + Sync + 'static,
    {
        self.deriv = DerivSpec::Generator(Arc::new(dx));
        self
    }

    /// See [`PhaseFn::retag`].
    pub fn retag(mut self, kind: ValueKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn deriv(&self, axis: usize) -> Result<ConfigFn> {
        match &self.deriv {
            DerivSpec::Analytic(d) => Ok((*d[axis]).clone()),
            DerivSpec::Generator(g) => g(axis),
            DerivSpec::FiniteDiff { step } => {
                let inner = self.clone();
                let step = *step;
                let mut out = ConfigFn::new(self.n, self.kind, move |x| {
                    let sample = |offset: f64| -> HScalar {
                        let mut xb = x.to_vec();
                        xb[axis] += offset;
                        inner.eval(&xb)
                    };
                    let v = sample(-2.0 * step).scale(1.0)
                        + sample(-step).scale(-8.0)
                        + sample(step).scale(8.0)
                        + sample(2.0 * step).scale(-1.0);
                    v.scale(1.0 / (12.0 * step))
                });
                out.deriv = DerivSpec::FiniteDiff { step };
                Ok(out)
            }
            DerivSpec::None => Err(CoreError::MissingDerivative),
        }
    }
}

/// Left shift Lambda(g): f(g') -> f(g^{-1} g').
pub fn left_shift(g: &GroupElement, f: &GroupFn) -> Result<GroupFn> {
    if g.n() != f.n() {
        return Err(CoreError::DimensionMismatch(g.n(), f.n()));
    }
    let gi = inverse(g);
    let inner = f.clone();
    Ok(GroupFn::new(f.n(), f.kind(), move |gp| {
        let shifted = compose(&gi, gp).expect("dimension checked at construction");
        inner.eval(&shifted)
    }))
}

// ---------------------------------------------------------------------------
// Lie-algebra vector fields
// ---------------------------------------------------------------------------

/// Which invariant vector field to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    S,
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Selector for S, X_j or Y_j, left- or right-invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSelector {
    pub field: FieldKind,
    pub side: Side,
    pub index: usize,
}

impl FieldSelector {
    pub fn left(field: FieldKind, index: usize) -> Self {
        FieldSelector { field, side: Side::Left, index }
    }

    pub fn right(field: FieldKind, index: usize) -> Self {
        FieldSelector { field, side: Side::Right, index }
    }
}

#[derive(Clone, Copy)]
enum Axis {
    S,
    X(usize),
    Y(usize),
}

fn central_diff(f: &GroupFn, pt: &GroupElement, axis: Axis, step: f64) -> HScalar {
    let sample = |offset: f64| -> HScalar {
        let mut g = pt.clone();
        match axis {
            Axis::S => g.s += offset,
            Axis::X(j) => g.x[j] += offset,
            Axis::Y(j) => g.y[j] += offset,
        }
        f.eval(&g)
    };
    (sample(step) - sample(-step)).scale(0.5 / step)
}

/// Central-finite-difference evaluation of the selected invariant field:
/// S = ±d/ds, X_j = ±d/dx_j - y_j/2 d/ds, Y_j = ±d/dy_j + x_j/2 d/ds,
/// with + for left- and - for right-invariant fields on the leading term.
/// Truncation error is O(step^2).
pub fn apply_field(sel: FieldSelector, f: &GroupFn, pt: &GroupElement, step: f64) -> Result<HScalar> {
    if sel.index >= f.n() {
        return Err(CoreError::DimensionMismatch(sel.index, f.n()));
    }
    if pt.n() != f.n() {
        return Err(CoreError::DimensionMismatch(pt.n(), f.n()));
    }
    let sign = match sel.side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let j = sel.index;
    let val = match sel.field {
        FieldKind::S => central_diff(f, pt, Axis::S, step).scale(sign),
        FieldKind::X => {
            let lead = central_diff(f, pt, Axis::X(j), step).scale(sign);
            let ds = central_diff(f, pt, Axis::S, step).scale(-0.5 * pt.y[j]);
            lead + ds
        }
        FieldKind::Y => {
            let lead = central_diff(f, pt, Axis::Y(j), step).scale(sign);
            let ds = central_diff(f, pt, Axis::S, step).scale(0.5 * pt.x[j]);
            lead + ds
        }
    };
    Ok(val)
}

/// Richardson-extrapolated field application: (4 D_{h/2} - D_h)/3, removing
/// the leading O(step^2) term.
pub fn apply_field_richardson(
    sel: FieldSelector,
    f: &GroupFn,
    pt: &GroupElement,
    step: f64,
) -> Result<HScalar> {
    let d1 = apply_field(sel, f, pt, step)?;
    let d2 = apply_field(sel, f, pt, 0.5 * step)?;
    Ok(d2.scale(4.0 / 3.0) + d1.scale(-1.0 / 3.0))
}

/// Wrap a field application as a new evaluable handle, so fields can be
/// nested (commutators).
pub fn field_fn(sel: FieldSelector, f: &GroupFn, step: f64) -> Result<GroupFn> {
    if sel.index >= f.n() {
        return Err(CoreError::DimensionMismatch(sel.index, f.n()));
    }
    let inner = f.clone();
    Ok(GroupFn::new(f.n(), f.kind(), move |pt| {
        apply_field(sel, &inner, pt, step).expect("index checked at construction")
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercomplex::HScalar;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_g(rng: &mut impl Rng, n: usize) -> GroupElement {
        GroupElement {
            s: rng.gen_range(-2.0..2.0),
            x: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            y: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        }
    }

    #[test]
    fn group_law_examples() {
        let a = GroupElement::new1(0.0, 1.0, 0.0);
        let b = GroupElement::new1(0.0, 0.0, 1.0);
        let c = compose(&a, &b).unwrap();
        assert_eq!(c, GroupElement::new1(0.5, 1.0, 1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = rand_g(&mut rng, 2);
            let e = GroupElement::identity(2);
            assert_eq!(compose(&g, &e).unwrap(), g);
            let gi = inverse(&g);
            let prod = compose(&g, &gi).unwrap();
            assert!(prod.s.abs() < 1e-15);
            assert!(prod.x.iter().chain(&prod.y).all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn inverse_examples() {
        let g = GroupElement::new1(1.0, 2.0, 3.0);
        assert_eq!(inverse(&g), GroupElement::new1(-1.0, -2.0, -3.0));
        let e = GroupElement::identity(1);
        assert_eq!(inverse(&e), e);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let g1 = rand_g(&mut rng, 1);
            let g2 = rand_g(&mut rng, 1);
            let lhs = inverse(&compose(&g1, &g2).unwrap());
            let rhs = compose(&inverse(&g2), &inverse(&g1)).unwrap();
            assert!((lhs.s - rhs.s).abs() < 1e-14);
            assert_eq!(lhs.x, rhs.x);
            assert_eq!(lhs.y, rhs.y);
        }
    }

    #[test]
    fn symplectic_examples() {
        assert_eq!(symplectic(&[1.0], &[0.0], &[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(symplectic(&[0.7], &[0.3], &[0.7], &[0.3]).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let (x, y, xp, yp) = (&v[0..2], &v[2..4], &v[4..6], &v[6..8]);
            let a = symplectic(x, y, xp, yp).unwrap();
            let b = symplectic(xp, yp, x, y).unwrap();
            assert!((a + b).abs() < 1e-14);
        }
        assert!(symplectic(&[1.0], &[1.0, 2.0], &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn associativity_and_centre() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let (a, b, c) = (rand_g(&mut rng, 1), rand_g(&mut rng, 1), rand_g(&mut rng, 1));
            let lhs = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            let rhs = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            assert!((lhs.s - rhs.s).abs() < 1e-12);
            assert_eq!(lhs.x, rhs.x);
            assert_eq!(lhs.y, rhs.y);

            let z = GroupElement::new1(rng.gen_range(-2.0..2.0), 0.0, 0.0);
            let g = rand_g(&mut rng, 1);
            assert_eq!(compose(&z, &g).unwrap(), compose(&g, &z).unwrap());
        }
    }

    fn sxy() -> GroupFn {
        GroupFn::new(1, ValueKind::Complex, |g| HScalar::real(g.s * g.x[0] * g.y[0]))
    }

    #[test]
    fn left_shift_examples() {
        let f = GroupFn::new(1, ValueKind::Complex, |g| HScalar::real(g.s));
        let shifted = left_shift(&GroupElement::new1(1.0, 0.0, 0.0), &f).unwrap();
        let at = GroupElement::new1(0.3, 0.0, 0.0);
        assert_eq!(shifted.eval(&at), HScalar::real(0.3 - 1.0));

        let e = GroupElement::identity(1);
        let id_shift = left_shift(&e, &sxy()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = rand_g(&mut rng, 1);
            assert_eq!(id_shift.eval(&g), sxy().eval(&g));
        }
    }

    #[test]
    fn left_shift_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = sxy();
        for _ in 0..10 {
            let g1 = rand_g(&mut rng, 1);
            let g2 = rand_g(&mut rng, 1);
            let lhs = left_shift(&g1, &left_shift(&g2, &f).unwrap()).unwrap();
            let rhs = left_shift(&compose(&g1, &g2).unwrap(), &f).unwrap();
            for _ in 0..10 {
                let pt = rand_g(&mut rng, 1);
                let d = lhs.eval(&pt) - rhs.eval(&pt);
                assert!(d.max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn field_examples() {
        let f_s = GroupFn::new(1, ValueKind::Complex, |g| HScalar::real(g.s));
        let pt = GroupElement::new1(0.4, -0.8, 1.1);
        let left = apply_field(FieldSelector::left(FieldKind::S, 0), &f_s, &pt, 1e-4).unwrap();
        assert!((left.re() - 1.0).abs() < 1e-10);
        let right = apply_field(FieldSelector::right(FieldKind::S, 0), &f_s, &pt, 1e-4).unwrap();
        assert!((right.re() + 1.0).abs() < 1e-10);

        // X on a function independent of x and s
        let f_y = GroupFn::new(1, ValueKind::Complex, |g| HScalar::real(g.y[0].powi(3)));
        let v = apply_field(FieldSelector::left(FieldKind::X, 0), &f_y, &pt, 1e-4).unwrap();
        assert!(v.max_abs() < 1e-10);
    }

    // ([X, Y] - S) f at pt against an exact reference for S f; comparing
    // with a differenced S f would cancel the shared O(step^2) defect
    fn commutator_defect(f: &GroupFn, pt: &GroupElement, s_exact: HScalar, step: f64) -> f64 {
        let x = FieldSelector::left(FieldKind::X, 0);
        let y = FieldSelector::left(FieldKind::Y, 0);
        let yf = field_fn(y, f, step).unwrap();
        let xf = field_fn(x, f, step).unwrap();
        let xy = apply_field(x, &yf, pt, step).unwrap();
        let yx = apply_field(y, &xf, pt, step).unwrap();
        (xy - yx - s_exact).max_abs()
    }

    #[test]
    fn heisenberg_commutator_on_sxy() {
        // [X, Y] f = S f on f = s x y; multilinear, so even coarse steps work
        let pt = GroupElement::new1(0.3, 0.7, -0.2);
        let sf = HScalar::real(pt.x[0] * pt.y[0]);
        let d = commutator_defect(&sxy(), &pt, sf, 1e-3);
        assert!(d < 1e-9, "defect {d}");
    }

    #[test]
    fn commutator_convergence_order() {
        // cubic with genuine third derivatives so the O(step^2) term is alive
        let f = GroupFn::new(1, ValueKind::Complex, |g| {
            HScalar::real(g.s.powi(3) + g.s * g.x[0] * g.y[0] + g.x[0].powi(3) - g.y[0].powi(3) + g.x[0].powi(2) * g.y[0])
        });
        let pt = GroupElement::new1(0.3, 0.7, -0.2);
        let sf = HScalar::real(3.0 * pt.s * pt.s + pt.x[0] * pt.y[0]);
        let e1 = commutator_defect(&f, &pt, sf, 0.08);
        let e2 = commutator_defect(&f, &pt, sf, 0.04);
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "measured order {order} (e1={e1:.3e}, e2={e2:.3e})");
        assert!(e1 > 1e-8, "defect must be a genuine truncation error, got {e1:.3e}");
    }

    #[test]
    fn other_commutators_vanish() {
        // n = 2: [X_0, X_1], [Y_0, Y_1], [X_0, Y_1], [X_0, S] all vanish
        let f = GroupFn::new(2, ValueKind::Complex, |g| {
            HScalar::real(
                g.s.powi(2) * g.x[0] + g.x[0] * g.x[1] * g.y[1] + g.y[0].powi(2) * g.x[1] + g.s * g.y[1],
            )
        });
        let pt = GroupElement::new(0.2, vec![0.5, -0.3], vec![0.4, 0.9]).unwrap();
        let step = 0.02;
        let pairs = [
            (FieldSelector::left(FieldKind::X, 0), FieldSelector::left(FieldKind::X, 1)),
            (FieldSelector::left(FieldKind::Y, 0), FieldSelector::left(FieldKind::Y, 1)),
            (FieldSelector::left(FieldKind::X, 0), FieldSelector::left(FieldKind::Y, 1)),
            (FieldSelector::left(FieldKind::X, 0), FieldSelector::left(FieldKind::S, 0)),
        ];
        for (a, b) in pairs {
            let bf = field_fn(b, &f, step).unwrap();
            let af = field_fn(a, &f, step).unwrap();
            let ab = apply_field(a, &bf, &pt, step).unwrap();
            let ba = apply_field(b, &af, &pt, step).unwrap();
            let d1 = (ab - ba).max_abs();
            let bf2 = field_fn(b, &f, step / 2.0).unwrap();
            let af2 = field_fn(a, &f, step / 2.0).unwrap();
            let ab2 = apply_field(a, &bf2, &pt, step / 2.0).unwrap();
            let ba2 = apply_field(b, &af2, &pt, step / 2.0).unwrap();
            let d2 = (ab2 - ba2).max_abs();
            // vanishing commutator: defect itself is O(step^2) around zero
            assert!(d1 < 1e-2, "commutator {a:?},{b:?} defect {d1}");
            if d1 > 1e-11 {
                let order = (d1 / d2).log2();
                assert!(order >= 1.9, "vanishing-commutator order {order}");
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn dyadic() -> impl Strategy<Value = f64> {
            (-1024i32..=1024).prop_map(|n| n as f64 / 32.0)
        }

        fn dyadic_g() -> impl Strategy<Value = GroupElement> {
            (dyadic(), dyadic(), dyadic()).prop_map(|(s, x, y)| GroupElement::new1(s, x, y))
        }

        proptest! {
            // dyadic coordinates keep the s-bookkeeping exact in f64
            #[test]
            fn compose_associative(a in dyadic_g(), b in dyadic_g(), c in dyadic_g()) {
                let lhs = compose(&compose(&a, &b).unwrap(), &c).unwrap();
                let rhs = compose(&a, &compose(&b, &c).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn inverse_cancels(g in dyadic_g()) {
                let e = compose(&g, &inverse(&g)).unwrap();
                prop_assert_eq!(e, GroupElement::identity(1));
            }

            #[test]
            fn symplectic_antisymmetric(a in dyadic_g(), b in dyadic_g()) {
                let w1 = symplectic(&a.x, &a.y, &b.x, &b.y).unwrap();
                let w2 = symplectic(&b.x, &b.y, &a.x, &a.y).unwrap();
                prop_assert_eq!(w1, -w2);
            }
        }
    }

    #[test]
    fn richardson_beats_plain() {
        let f = GroupFn::new(1, ValueKind::Complex, |g| HScalar::real((g.s + g.x[0]).powi(3)));
        let pt = GroupElement::new1(0.2, 0.4, -0.1);
        let sel = FieldSelector::left(FieldKind::S, 0);
        let exact = 3.0 * (pt.s + pt.x[0]).powi(2);
        let plain = apply_field(sel, &f, &pt, 0.05).unwrap().re();
        let rich = apply_field_richardson(sel, &f, &pt, 0.05).unwrap().re();
        assert!((rich - exact).abs() < (plain - exact).abs() * 1e-2);
    }
}
