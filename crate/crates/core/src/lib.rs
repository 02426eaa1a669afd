//! Numerics for mechanics on the Heisenberg group over three scalar
//! algebras: complex (elliptic unit i), dual (parabolic unit p) and double
//! (hyperbolic unit h) numbers.
//!
//! The crate provides
//! * the scalar algebra tower ([`hypercomplex`]),
//! * the group H^n with its invariant vector fields ([`heisenberg`]),
//! * induced representations on phase and configuration space ([`repr`]),
//! * observable kernels, character-dependent brackets and oscillator
//!   dynamics ([`pmech`]),
//! * states, position measurements and two-slit interference ([`states`]).

pub mod error;
pub mod heisenberg;
pub mod pmech;
pub mod repr;
pub mod states;
pub mod hypercomplex;

pub use error::{CoreError, Result};
pub use heisenberg::{
    apply_field, apply_field_richardson, compose, field_fn, inverse, left_shift, symplectic,
    ConfigFn, FieldKind, FieldSelector, GroupElement, GroupFn, PhaseFn, Side, ValueKind,
};
pub use hypercomplex::{char_exp, HScalar, UnitTag};
pub use pmech::{
    bracket, cfl_bound, cubic_rhs_field, dispersion_coeff, evolve_cubic, harmonic_characteristic,
    harmonic_flow, heisenberg_rhs, pmechanise, poisson_quadrature, star_compose, Grid2,
    ObservableKernel, OscillatorParams, PhaseField, PMechOperator, PolyQP,
};
pub use repr::{
    commutative_rep, lift, parabolic_rep, pull, sb_elliptic, sb_hyperbolic, schrodinger,
    schrodinger_config, schrodinger_via_lift, CharacterParams, RepKind,
};
pub use states::{
    count_sign_changes, cross_kernel, cross_term_kernel, elliptic_gaussian_kernel_closed,
    gaussian_pair_a_closed, gaussian_superposition_kernel_closed, hermitian_defect,
    hyperbolic_gaussian_kernel_closed, interference_coefficient, measure_position,
    measure_position_full, state_kernel, two_slit_curve, Measurement, PositionObservable,
    Provenance, StateFunction, StateKernel, StateKind, TwoSlitCurve,
};
