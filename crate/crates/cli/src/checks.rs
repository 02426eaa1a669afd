//! Invariant suites behind the `check` subcommand. Each check has a stable
//! name; the runner stops at the first failure and reports it.

use pmech_core::*;
use std::f64::consts::PI;

/// Faults injectable by the test harness to verify the checker notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Pretend p^2 = 1 instead of 0.
    ParabolicNilpotency,
}

pub fn parse_fault(s: &str) -> Option<Fault> {
    match s {
        "parabolic-nilpotency" => Some(Fault::ParabolicNilpotency),
        _ => None,
    }
}

pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckReport {
    CheckReport { name, passed, detail }
}

fn splitmix(state: &mut u64) -> f64 {
    // deterministic uniform in [-1, 1)
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

pub fn run_all(fault: Option<Fault>) -> Vec<CheckReport> {
    let mut out = Vec::new();

    out.push({
        let i2 = HScalar::unit_i() * HScalar::unit_i();
        let h2 = HScalar::unit_h() * HScalar::unit_h();
        let ip = HScalar::unit_i() * HScalar::unit_p();
        let ok = i2 == HScalar::real(-1.0)
            && h2 == HScalar::double(1.0, 0.0)
            && ip == HScalar::unit_ip()
            && (HScalar::h_plus() * HScalar::h_minus()).max_abs() < 1e-15;
        check("algebra unit relations", ok, "i^2=-1, h^2=1, ip, zero divisors".into())
    });

    out.push({
        let mut sq = HScalar::unit_p() * HScalar::unit_p();
        if fault == Some(Fault::ParabolicNilpotency) {
            // harness hook: corrupt the product as if p^2 = 1
            sq = sq + HScalar::real(1.0);
        }
        let ok = sq == HScalar::ZERO;
        check("parabolic nilpotency", ok, format!("p*p = {sq}"))
    });

    out.push({
        let mut worst = 0.0f64;
        let mut st = 1u64;
        for u in [UnitTag::Elliptic, UnitTag::Parabolic, UnitTag::Hyperbolic] {
            for _ in 0..50 {
                let s = 10.0 * splitmix(&mut st);
                let t = 10.0 * splitmix(&mut st);
                let (a, b) = (char_exp(u, s), char_exp(u, t));
                let scale = (1.0 + a.max_abs()) * (1.0 + b.max_abs());
                worst = worst.max((a * b - char_exp(u, s + t)).max_abs() / scale);
            }
        }
        check("character homomorphism", worst < 1e-12, format!("max defect {worst:.3e}"))
    });

    out.push({
        let mut worst = 0.0f64;
        let mut st = 2u64;
        for _ in 0..50 {
            let a = HScalar::c4(splitmix(&mut st), splitmix(&mut st), splitmix(&mut st), splitmix(&mut st));
            let b = HScalar::c4(splitmix(&mut st), splitmix(&mut st), splitmix(&mut st), splitmix(&mut st));
            let lhs = (a * b).seminorm_sq().unwrap();
            let rhs = a.seminorm_sq().unwrap() * b.seminorm_sq().unwrap();
            worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
        check("seminorm multiplicativity", worst < 1e-12, format!("max defect {worst:.3e}"))
    });

    out.push({
        let mut st = 5u64;
        let mut ok = true;
        let mut sample = String::new();
        for _ in 0..25 {
            let v = if splitmix(&mut st) > 0.0 {
                HScalar::c4(splitmix(&mut st), splitmix(&mut st), splitmix(&mut st), splitmix(&mut st))
            } else {
                HScalar::double(splitmix(&mut st), splitmix(&mut st))
            };
            let text = format!("{v}");
            ok &= match crate::hscalar_text::parse_hscalar(&text) {
                Ok(back) => back == v,
                Err(_) => false,
            };
            sample = text;
        }
        check("scalar text round-trip", ok, format!("last sample '{sample}'"))
    });

    out.push({
        let mut st = 3u64;
        let mut worst = 0.0f64;
        let g = |st: &mut u64| {
            GroupElement::new1(2.0 * splitmix(st), 2.0 * splitmix(st), 2.0 * splitmix(st))
        };
        for _ in 0..50 {
            let (a, b, c) = (g(&mut st), g(&mut st), g(&mut st));
            let lhs = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            let rhs = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            worst = worst.max((lhs.s - rhs.s).abs());
            let gi = compose(&a, &inverse(&a)).unwrap();
            worst = worst.max(gi.s.abs() + gi.x[0].abs() + gi.y[0].abs());
            let z = GroupElement::new1(splitmix(&mut st), 0.0, 0.0);
            let zc = compose(&z, &a).unwrap();
            let cz = compose(&a, &z).unwrap();
            worst = worst.max((zc.s - cz.s).abs());
        }
        check("group law (associativity, inverse, centre)", worst < 1e-12, format!("max defect {worst:.3e}"))
    });

    out.push({
        // finite-difference commutator [X, Y] = S on a cubic, with the
        // measured convergence order reported
        let f = GroupFn::new(1, ValueKind::Complex, |g| {
            HScalar::real(g.s.powi(3) + g.s * g.x[0] * g.y[0] + g.x[0].powi(2) * g.y[0])
        });
        let pt = GroupElement::new1(0.3, 0.7, -0.2);
        let s_exact = HScalar::real(3.0 * pt.s * pt.s + pt.x[0] * pt.y[0]);
        let defect = |step: f64| {
            let x = FieldSelector::left(FieldKind::X, 0);
            let y = FieldSelector::left(FieldKind::Y, 0);
            let yf = field_fn(y, &f, step).unwrap();
            let xf = field_fn(x, &f, step).unwrap();
            let xy = apply_field(x, &yf, &pt, step).unwrap();
            let yx = apply_field(y, &xf, &pt, step).unwrap();
            (xy - yx - s_exact).max_abs()
        };
        let e1 = defect(0.08);
        let e2 = defect(0.04);
        let order = (e1 / e2).log2();
        check(
            "Lie-algebra commutator convergence",
            order >= 1.9,
            format!("measured order {order:.3} (defects {e1:.3e} -> {e2:.3e})"),
        )
    });

    out.push({
        let mut st = 4u64;
        let mut worst = 0.0f64;
        for (unit, kind) in [
            (UnitTag::Elliptic, ValueKind::Complex),
            (UnitTag::Parabolic, ValueKind::CAlgebra),
            (UnitTag::Hyperbolic, ValueKind::Double),
        ] {
            let params = CharacterParams::new(unit, 0.4);
            let f = {
                let f = ConfigFn::new1(kind, |x: f64| HScalar::real((-x * x).exp()));
                let d1 = ConfigFn::new1(kind, |x: f64| HScalar::real(-2.0 * x * (-x * x).exp()));
                let d2 =
                    ConfigFn::new1(kind, |x: f64| HScalar::real((4.0 * x * x - 2.0) * (-x * x).exp()));
                f.with_analytic_derivs(vec![d1.with_analytic_derivs(vec![d2])])
            };
            for _ in 0..10 {
                let g1 = GroupElement::new1(splitmix(&mut st), splitmix(&mut st), splitmix(&mut st));
                let g2 = GroupElement::new1(splitmix(&mut st), splitmix(&mut st), splitmix(&mut st));
                let lhs =
                    schrodinger(unit, &g1, &params, &schrodinger(unit, &g2, &params, &f).unwrap())
                        .unwrap();
                let rhs = schrodinger(unit, &compose(&g1, &g2).unwrap(), &params, &f).unwrap();
                for _ in 0..10 {
                    let x = 1.5 * splitmix(&mut st);
                    let b = rhs.eval1(x);
                    worst = worst.max((lhs.eval1(x) - b).max_abs() / (1.0 + b.max_abs()));
                }
            }
        }
        check("representation homomorphisms", worst < 1e-12, format!("max defect {worst:.3e}"))
    });

    out.push({
        let grid = Grid2::square(6.0, 24).unwrap();
        let params = CharacterParams::new(UnitTag::Elliptic, 0.5);
        let k1 = ObservableKernel::gaussian(grid.clone(), params, 0.4, 0.2, 0.7);
        let k2 = ObservableKernel::gaussian(grid, params, -0.3, -0.1, 0.9);
        let mut ok = true;
        for unit in [UnitTag::Elliptic, UnitTag::Hyperbolic, UnitTag::Parabolic] {
            let b12 = bracket(unit, &k1, &k2).unwrap();
            let b21 = bracket(unit, &k2, &k1).unwrap();
            ok &= b12
                .data
                .iter()
                .zip(b21.data.iter())
                .all(|(a, b)| *a == b.neg());
        }
        check("bracket antisymmetry", ok, "bitwise across all three characters".into())
    });

    out.push({
        let grid = Grid2::square(6.0, 32).unwrap();
        let err_at = |hbar: f64| {
            let params = CharacterParams::new(UnitTag::Elliptic, hbar);
            let k1 = ObservableKernel::gaussian(grid.clone(), params, 0.5, -0.2, 0.6);
            let k2 = ObservableKernel::gaussian(grid.clone(), params, -0.4, 0.3, 0.8);
            let poisson = poisson_quadrature(&k1, &k2).unwrap();
            let b = bracket(UnitTag::Elliptic, &k1, &k2).unwrap();
            let ch = params.h();
            b.map(|v| v * HScalar::complex(0.0, -1.0 / ch)).max_abs_diff(&poisson)
                / poisson.max_abs()
        };
        let ratio = err_at(0.2) / err_at(0.1);
        check(
            "Moyal to Poisson order",
            ratio >= 3.5,
            format!("hbar-halving error ratio {ratio:.3} (expected near 4)"),
        )
    });

    out.push({
        let params = CharacterParams::new(UnitTag::Elliptic, 1.0);
        let v = StateFunction::gaussian(0.0, 2.0, 1.0, 1.0, 1.0);
        let l = state_kernel(&v, UnitTag::Elliptic, &params).unwrap();
        let mut worst = 0.0f64;
        for c in [0.0, 0.5] {
            let got = measure_position(&PositionObservable { c, hbar: 1.0 }, &l).unwrap();
            let want = (2.0f64).sqrt() * (-2.0 * PI * c * c).exp();
            worst = worst.max((got - want).abs() / want);
        }
        check("Gaussian measurement closed form", worst < 1e-6, format!("max rel err {worst:.3e}"))
    });

    out
}
