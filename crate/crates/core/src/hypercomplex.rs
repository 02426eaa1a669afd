//! Scalar algebra tower: complex, dual and double numbers, and the
//! commutative four-unit algebra spanned by {1, i, p, ip} with i^2 = -1,
//! p^2 = 0.
//!
//! Double numbers (h^2 = +1) are kept as a separate kind over {1, h}; they
//! never mix with p or i here, and combining them with anything but a real
//! value is an error rather than a silent embedding.

use crate::error::{CoreError, Result};
use std::fmt;

/// Hypercomplex unit selecting one of the three characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitTag {
    /// i, with i^2 = -1 (quantum case).
    Elliptic,
    /// p, with p^2 = 0 (classical case).
    Parabolic,
    /// h, with h^2 = +1.
    Hyperbolic,
}

impl UnitTag {
    /// The square of the unit as a real number: -1, 0 or +1.
    pub fn unit_square(self) -> f64 {
        match self {
            UnitTag::Elliptic => -1.0,
            UnitTag::Parabolic => 0.0,
            UnitTag::Hyperbolic => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitTag::Elliptic => "elliptic",
            UnitTag::Parabolic => "parabolic",
            UnitTag::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for UnitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value in one of the scalar algebras.
///
/// * `C` holds a + b i + c p + d ip; reals, complex and dual numbers are the
///   sub-kinds with the respective components zero.
/// * `Double` holds a + b h over the split-complex unit h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HScalar {
    C { re: f64, im_i: f64, im_p: f64, im_ip: f64 },
    Double { re: f64, im_h: f64 },
}

use HScalar::{Double, C};

impl HScalar {
    pub const ZERO: HScalar = C { re: 0.0, im_i: 0.0, im_p: 0.0, im_ip: 0.0 };
    pub const ONE: HScalar = C { re: 1.0, im_i: 0.0, im_p: 0.0, im_ip: 0.0 };

    pub fn real(a: f64) -> HScalar {
        C { re: a, im_i: 0.0, im_p: 0.0, im_ip: 0.0 }
    }

    pub fn complex(a: f64, b: f64) -> HScalar {
        C { re: a, im_i: b, im_p: 0.0, im_ip: 0.0 }
    }

    pub fn dual(a: f64, c: f64) -> HScalar {
        C { re: a, im_i: 0.0, im_p: c, im_ip: 0.0 }
    }

    pub fn c4(a: f64, b: f64, c: f64, d: f64) -> HScalar {
        C { re: a, im_i: b, im_p: c, im_ip: d }
    }

    pub fn double(a: f64, b: f64) -> HScalar {
        Double { re: a, im_h: b }
    }

    pub fn unit_i() -> HScalar {
        HScalar::complex(0.0, 1.0)
    }

    pub fn unit_p() -> HScalar {
        HScalar::dual(0.0, 1.0)
    }

    pub fn unit_ip() -> HScalar {
        HScalar::c4(0.0, 0.0, 0.0, 1.0)
    }

    pub fn unit_h() -> HScalar {
        HScalar::double(0.0, 1.0)
    }

    /// Zero divisor (1 + h)/sqrt(2).
    pub fn h_plus() -> HScalar {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        HScalar::double(s, s)
    }

    /// Zero divisor (1 - h)/sqrt(2).
    pub fn h_minus() -> HScalar {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        HScalar::double(s, -s)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            C { im_i, im_p, im_ip, .. } => {
                if *im_i == 0.0 && *im_p == 0.0 && *im_ip == 0.0 {
                    "real"
                } else if *im_p == 0.0 && *im_ip == 0.0 {
                    "complex"
                } else if *im_i == 0.0 && *im_ip == 0.0 {
                    "dual"
                } else {
                    "C"
                }
            }
            Double { .. } => "double",
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            C { im_i, im_p, im_ip, .. } => *im_i == 0.0 && *im_p == 0.0 && *im_ip == 0.0,
            Double { im_h, .. } => *im_h == 0.0,
        }
    }

    /// Real (unit-free) component, defined for every kind.
    pub fn re(&self) -> f64 {
        match self {
            C { re, .. } | Double { re, .. } => *re,
        }
    }

    pub fn as_c(&self) -> Option<(f64, f64, f64, f64)> {
        match self {
            C { re, im_i, im_p, im_ip } => Some((*re, *im_i, *im_p, *im_ip)),
            Double { .. } => None,
        }
    }

    pub fn as_double(&self) -> Option<(f64, f64)> {
        match self {
            Double { re, im_h } => Some((*re, *im_h)),
            C { .. } => None,
        }
    }

    fn promote_real_to_double(self) -> Option<(f64, f64)> {
        match self {
            Double { re, im_h } => Some((re, im_h)),
            C { re, im_i, im_p, im_ip } if im_i == 0.0 && im_p == 0.0 && im_ip == 0.0 => {
                Some((re, 0.0))
            }
            _ => None,
        }
    }

    /// Componentwise sum; double only combines with real or double.
    pub fn try_add(self, rhs: HScalar) -> Result<HScalar> {
        match (self, rhs) {
            (
                C { re: a1, im_i: b1, im_p: c1, im_ip: d1 },
                C { re: a2, im_i: b2, im_p: c2, im_ip: d2 },
            ) => Ok(C { re: a1 + a2, im_i: b1 + b2, im_p: c1 + c2, im_ip: d1 + d2 }),
            (x, y) => match (x.promote_real_to_double(), y.promote_real_to_double()) {
                (Some((a1, b1)), Some((a2, b2))) => Ok(Double { re: a1 + a2, im_h: b1 + b2 }),
                _ => Err(CoreError::IncompatibleAlgebra(x.kind_name(), y.kind_name())),
            },
        }
    }

    /// Product under i^2 = -1, p^2 = 0, (ip)^2 = 0 resp. h^2 = +1.
    pub fn try_mul(self, rhs: HScalar) -> Result<HScalar> {
        match (self, rhs) {
            (
                C { re: a1, im_i: b1, im_p: c1, im_ip: d1 },
                C { re: a2, im_i: b2, im_p: c2, im_ip: d2 },
            ) => Ok(C {
                re: a1 * a2 - b1 * b2,
                im_i: a1 * b2 + b1 * a2,
                im_p: a1 * c2 + c1 * a2 - b1 * d2 - d1 * b2,
                im_ip: a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
            }),
            (x, y) => match (x.promote_real_to_double(), y.promote_real_to_double()) {
                (Some((a1, b1)), Some((a2, b2))) => {
                    Ok(Double { re: a1 * a2 + b1 * b2, im_h: a1 * b2 + b1 * a2 })
                }
                _ => Err(CoreError::IncompatibleAlgebra(x.kind_name(), y.kind_name())),
            },
        }
    }

    pub fn neg(self) -> HScalar {
        match self {
            C { re, im_i, im_p, im_ip } => C { re: -re, im_i: -im_i, im_p: -im_p, im_ip: -im_ip },
            Double { re, im_h } => Double { re: -re, im_h: -im_h },
        }
    }

    pub fn try_sub(self, rhs: HScalar) -> Result<HScalar> {
        self.try_add(rhs.neg())
    }

    pub fn scale(self, k: f64) -> HScalar {
        match self {
            C { re, im_i, im_p, im_ip } => {
                C { re: k * re, im_i: k * im_i, im_p: k * im_p, im_ip: k * im_ip }
            }
            Double { re, im_h } => Double { re: k * re, im_h: k * im_h },
        }
    }

    /// Natural involution of the kind: i -> -i (and ip -> -ip) on C,
    /// h -> -h on double numbers. Used by the skew-linear pairings.
    pub fn conj(self) -> HScalar {
        match self {
            C { re, im_i, im_p, im_ip } => C { re, im_i: -im_i, im_p, im_ip: -im_ip },
            Double { re, im_h } => Double { re, im_h: -im_h },
        }
    }

    /// Seminorm |a + bi + cp + dip|^2 = a^2 + b^2 on the algebra C.
    ///
    /// It vanishes exactly on the ideal generated by p. Not defined for
    /// double numbers.
    pub fn seminorm_sq(&self) -> Result<f64> {
        match self {
            C { re, im_i, .. } => Ok(re * re + im_i * im_i),
            Double { .. } => Err(CoreError::UnsupportedKind { op: "seminorm_sq", kind: "double" }),
        }
    }

    /// Coordinates in the idempotent basis e± = (1 ± h)/2 of the double
    /// numbers, i.e. a + bh = (a+b) e+ + (a-b) e-.
    ///
    /// Multiplication becomes componentwise in these coordinates. Note the
    /// normalised zero divisors (1 ± h)/sqrt(2) map to (sqrt(2), 0) and
    /// (0, sqrt(2)): the unit 1 has coordinates (1, 1).
    pub fn split_double(&self) -> Result<(f64, f64)> {
        match self {
            Double { re, im_h } => Ok((re + im_h, re - im_h)),
            C { .. } => Err(CoreError::UnsupportedKind { op: "split_double", kind: self.kind_name() }),
        }
    }

    /// Largest absolute component, for tolerance checks.
    pub fn max_abs(&self) -> f64 {
        match self {
            C { re, im_i, im_p, im_ip } => re.abs().max(im_i.abs()).max(im_p.abs()).max(im_ip.abs()),
            Double { re, im_h } => re.abs().max(im_h.abs()),
        }
    }
}

/// Character exponential of the unit: cos t + i sin t, 1 + pt, or
/// cosh t + h sinh t. Satisfies the homomorphism
/// `char_exp(u, s) * char_exp(u, t) = char_exp(u, s + t)`.
pub fn char_exp(u: UnitTag, t: f64) -> HScalar {
    match u {
        UnitTag::Elliptic => HScalar::complex(t.cos(), t.sin()),
        UnitTag::Parabolic => HScalar::dual(1.0, t),
        UnitTag::Hyperbolic => HScalar::double(t.cosh(), t.sinh()),
    }
}

impl std::ops::Add for HScalar {
    type Output = HScalar;
    fn add(self, rhs: HScalar) -> HScalar {
        self.try_add(rhs).expect("incompatible scalar kinds in +")
    }
}

impl std::ops::Sub for HScalar {
    type Output = HScalar;
    fn sub(self, rhs: HScalar) -> HScalar {
        self.try_sub(rhs).expect("incompatible scalar kinds in -")
    }
}

impl std::ops::Mul for HScalar {
    type Output = HScalar;
    fn mul(self, rhs: HScalar) -> HScalar {
        self.try_mul(rhs).expect("incompatible scalar kinds in *")
    }
}

impl std::ops::Neg for HScalar {
    type Output = HScalar;
    fn neg(self) -> HScalar {
        HScalar::neg(self)
    }
}

impl fmt::Display for HScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn signed(f: &mut fmt::Formatter<'_>, v: f64, unit: &str) -> fmt::Result {
            if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
                write!(f, "-{}{unit}", -v)
            } else {
                write!(f, "+{v}{unit}")
            }
        }
        match self {
            C { re, im_i, im_p, im_ip } => {
                write!(f, "{re}")?;
                signed(f, *im_i, "i")?;
                signed(f, *im_p, "p")?;
                signed(f, *im_ip, "ip")
            }
            Double { re, im_h } => {
                write!(f, "{re}")?;
                signed(f, *im_h, "h")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn add_examples() {
        let a = HScalar::dual(1.0, 2.0) + HScalar::dual(3.0, 4.0);
        assert_eq!(a, HScalar::dual(4.0, 6.0));

        let x = HScalar::c4(0.3, -1.0, 2.0, 0.5);
        assert_eq!(x + HScalar::ZERO, x);

        let s = HScalar::complex(1.0, 1.0) + HScalar::complex(1.0, -1.0);
        assert_eq!(s, HScalar::real(2.0));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(
            HScalar::dual(1.0, 2.0) * HScalar::dual(3.0, 4.0),
            HScalar::dual(3.0, 10.0)
        );
        assert_eq!(HScalar::unit_i() * HScalar::unit_p(), HScalar::unit_ip());
        assert_eq!(HScalar::unit_ip() * HScalar::unit_ip(), HScalar::ZERO);
    }

    #[test]
    fn zero_divisors() {
        let prod = HScalar::h_plus() * HScalar::h_minus();
        assert!(prod.max_abs() < 1e-15);

        // (1 ± h)/sqrt(2) squares to sqrt(2) times itself; the actual
        // idempotents are (1 ± h)/2.
        let sq = HScalar::h_plus() * HScalar::h_plus();
        let diff = sq - HScalar::h_plus().scale(SQRT2);
        assert!(diff.max_abs() < 1e-15);

        let e_plus = HScalar::double(0.5, 0.5);
        assert_eq!(e_plus * e_plus, e_plus);
        let e_minus = HScalar::double(0.5, -0.5);
        assert_eq!(e_minus * e_minus, e_minus);
    }

    #[test]
    fn double_does_not_mix_with_c() {
        let err = HScalar::unit_h().try_mul(HScalar::unit_i()).unwrap_err();
        assert!(matches!(err, CoreError::IncompatibleAlgebra(_, _)));
        let err = HScalar::unit_h().try_add(HScalar::unit_p()).unwrap_err();
        assert!(matches!(err, CoreError::IncompatibleAlgebra(_, _)));
        // reals promote
        assert_eq!(
            HScalar::real(2.0) * HScalar::unit_h(),
            HScalar::double(0.0, 2.0)
        );
    }

    #[test]
    fn seminorm_examples() {
        assert_eq!(HScalar::c4(2.0, 3.0, 5.0, 7.0).seminorm_sq().unwrap(), 13.0);
        assert_eq!(HScalar::unit_p().seminorm_sq().unwrap(), 0.0);
        assert_eq!(HScalar::unit_i().seminorm_sq().unwrap(), 1.0);
        assert!(HScalar::unit_h().seminorm_sq().is_err());
    }

    #[test]
    fn char_exp_examples() {
        assert_eq!(char_exp(UnitTag::Parabolic, 3.0), HScalar::dual(1.0, 3.0));
        assert_eq!(char_exp(UnitTag::Elliptic, 0.0), HScalar::ONE);
        for k in 0..40 {
            let t = -10.0 + 0.5 * k as f64;
            let a = char_exp(UnitTag::Hyperbolic, t);
            let prod = a * char_exp(UnitTag::Hyperbolic, -t);
            let diff = prod - HScalar::double(1.0, 0.0);
            // cancellation scale is cosh^2(t), so measure relative to it
            let scale = 1.0 + a.max_abs() * a.max_abs();
            assert!(diff.max_abs() / scale < 1e-12, "cosh^2 - sinh^2 defect at t = {t}");
        }
    }

    #[test]
    fn char_exp_homomorphism() {
        for u in [UnitTag::Elliptic, UnitTag::Parabolic, UnitTag::Hyperbolic] {
            for i in 0..30 {
                let s = -10.0 + 0.7 * i as f64;
                let t = 10.0 - 0.63 * i as f64;
                let (a, b) = (char_exp(u, s), char_exp(u, t));
                let lhs = a * b;
                let rhs = char_exp(u, s + t);
                let scale = (1.0 + a.max_abs()) * (1.0 + b.max_abs());
                assert!(
                    (lhs - rhs).max_abs() / scale < 1e-12,
                    "character homomorphism defect for {u} at ({s}, {t})"
                );
            }
        }
    }

    #[test]
    fn split_examples() {
        assert_eq!(HScalar::double(1.0, 0.0).split_double().unwrap(), (1.0, 1.0));
        let (hp0, hp1) = HScalar::h_plus().split_double().unwrap();
        assert!((hp0 - SQRT2).abs() < 1e-15 && hp1 == 0.0);
        assert!(HScalar::real(1.0).split_double().is_err());
    }

    #[test]
    fn p_ideal_absorption() {
        let m = HScalar::c4(0.0, 0.0, 1.5, -2.5); // a p-multiple
        let any = HScalar::c4(0.7, -1.3, 4.0, 2.0);
        let prod = m * any;
        let (re, im_i, _, _) = prod.as_c().unwrap();
        assert_eq!(re, 0.0);
        assert_eq!(im_i, 0.0);
    }

    // Dyadic components keep all products and sums exact in f64, so the ring
    // laws can be checked without tolerance.
    fn dyadic() -> impl Strategy<Value = f64> {
        (-2048i32..=2048).prop_map(|n| n as f64 / 16.0)
    }

    fn c_value() -> impl Strategy<Value = HScalar> {
        (dyadic(), dyadic(), dyadic(), dyadic()).prop_map(|(a, b, c, d)| HScalar::c4(a, b, c, d))
    }

    fn double_value() -> impl Strategy<Value = HScalar> {
        (dyadic(), dyadic()).prop_map(|(a, b)| HScalar::double(a, b))
    }

    proptest! {
        #[test]
        fn c_ring_laws(a in c_value(), b in c_value(), c in c_value()) {
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
        }

        #[test]
        fn double_ring_laws(a in double_value(), b in double_value(), c in double_value()) {
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
        }

        #[test]
        fn seminorm_multiplicative(a in c_value(), b in c_value()) {
            let lhs = (a * b).seminorm_sq().unwrap();
            let rhs = a.seminorm_sq().unwrap() * b.seminorm_sq().unwrap();
            let scale = 1.0 + rhs.abs();
            prop_assert!((lhs - rhs).abs() / scale < 1e-12);
        }

        #[test]
        fn split_is_multiplicative(a in double_value(), b in double_value()) {
            let (a0, a1) = a.split_double().unwrap();
            let (b0, b1) = b.split_double().unwrap();
            let (p0, p1) = (a * b).split_double().unwrap();
            prop_assert_eq!(p0, a0 * b0);
            prop_assert_eq!(p1, a1 * b1);
        }
    }
}
