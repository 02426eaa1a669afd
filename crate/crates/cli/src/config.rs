//! Run configuration: a flat key = value file with `#` comments, every key
//! overridable by a command-line flag.

use anyhow::{anyhow, bail, Result};
use pmech_core::{OscillatorParams, StateFunction, UnitTag};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateChoice {
    Gaussian,
    Rational,
    Bump,
}

impl StateChoice {
    pub fn name(self) -> &'static str {
        match self {
            StateChoice::Gaussian => "gaussian",
            StateChoice::Rational => "rational",
            StateChoice::Bump => "bump",
        }
    }
}

/// Full experiment configuration with the documented defaults
/// (m = omega = hbar = 1, slit separation b = 2, detector range [-3, 3]
/// with 2048 points).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub character: UnitTag,
    pub hbar: f64,
    pub m: f64,
    pub omega: f64,
    pub lambda: f64,
    pub state: StateChoice,
    pub a: f64,
    pub b: f64,
    /// Bump half-widths (used by the bump state only).
    pub bump_rq: f64,
    pub bump_rp: f64,
    pub grid_n: usize,
    pub grid_l: f64,
    pub t_final: f64,
    pub dt: f64,
    pub snap_every: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_points: usize,
    pub out: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            character: UnitTag::Elliptic,
            hbar: 1.0,
            m: 1.0,
            omega: 1.0,
            lambda: 0.0,
            state: StateChoice::Gaussian,
            a: 0.0,
            b: 2.0,
            bump_rq: 1.0,
            bump_rp: 0.45,
            grid_n: 128,
            grid_l: 8.0,
            t_final: 2.0 * std::f64::consts::PI,
            dt: 2.0 * std::f64::consts::PI / 4096.0,
            snap_every: 64,
            c_min: -3.0,
            c_max: 3.0,
            c_points: 2048,
            out: "pmech_out.csv".to_string(),
        }
    }
}

pub fn parse_character(s: &str) -> Result<UnitTag> {
    match s {
        "elliptic" => Ok(UnitTag::Elliptic),
        "parabolic" => Ok(UnitTag::Parabolic),
        "hyperbolic" => Ok(UnitTag::Hyperbolic),
        other => bail!("unknown character '{other}' (elliptic|parabolic|hyperbolic)"),
    }
}

pub fn parse_state(s: &str) -> Result<StateChoice> {
    match s {
        "gaussian" => Ok(StateChoice::Gaussian),
        "rational" => Ok(StateChoice::Rational),
        "bump" => Ok(StateChoice::Bump),
        other => bail!("unknown state kind '{other}' (gaussian|rational|bump)"),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let fv = || -> Result<f64> {
            value.parse::<f64>().map_err(|e| anyhow!("bad value for {key}: {e}"))
        };
        let uv = || -> Result<usize> {
            value.parse::<usize>().map_err(|e| anyhow!("bad value for {key}: {e}"))
        };
        match key {
            "character" => self.character = parse_character(value)?,
            "state" => self.state = parse_state(value)?,
            "hbar" => self.hbar = fv()?,
            "m" => self.m = fv()?,
            "omega" => self.omega = fv()?,
            "lambda" => self.lambda = fv()?,
            "a" => self.a = fv()?,
            "b" => self.b = fv()?,
            "bump_rq" => self.bump_rq = fv()?,
            "bump_rp" => self.bump_rp = fv()?,
            "grid_n" => self.grid_n = uv()?,
            "grid_l" => self.grid_l = fv()?,
            "t_final" => self.t_final = fv()?,
            "dt" => self.dt = fv()?,
            "snap_every" => self.snap_every = uv()?,
            "c_min" => self.c_min = fv()?,
            "c_max" => self.c_max = fv()?,
            "c_points" => self.c_points = uv()?,
            "out" => self.out = value.to_string(),
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read config {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {} is not key=value: '{raw}'", lineno + 1))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0) {
            bail!("hbar must be positive, got {}", self.hbar);
        }
        if !(self.m > 0.0) || !(self.omega > 0.0) {
            bail!("m and omega must be positive");
        }
        if self.grid_n < 8 {
            bail!("grid_n must be at least 8, got {}", self.grid_n);
        }
        if !(self.grid_l > 0.0) {
            bail!("grid_l must be positive");
        }
        if !(self.dt > 0.0) || !(self.t_final > 0.0) {
            bail!("t_final and dt must be positive");
        }
        if self.c_points < 2 {
            bail!("c_points must be at least 2");
        }
        if !(self.c_min < self.c_max) {
            bail!("c_min must be below c_max");
        }
        if self.snap_every == 0 {
            bail!("snap_every must be positive");
        }
        if self.state == StateChoice::Bump && (!(self.bump_rq > 0.0) || !(self.bump_rp > 0.0)) {
            bail!("bump half-widths must be positive");
        }
        if self.character == UnitTag::Hyperbolic
            && self.state == StateChoice::Rational
            && 2.0 * self.b.abs() >= 2.0 * (self.hbar * self.omega * self.m).sqrt()
        {
            bail!(
                "hyperbolic rational pairing diverges: need |b| < sqrt(hbar*omega*m) = {:.4}",
                (self.hbar * self.omega * self.m).sqrt()
            );
        }
        Ok(())
    }

    pub fn osc(&self) -> OscillatorParams {
        OscillatorParams::new(self.m, self.omega, self.lambda).expect("validated")
    }

    /// The two slit states at (a, +-b).
    pub fn slit_states(&self) -> (StateFunction, StateFunction) {
        match self.state {
            StateChoice::Gaussian => (
                StateFunction::gaussian(self.a, self.b, self.m, self.omega, self.hbar),
                StateFunction::gaussian(self.a, -self.b, self.m, self.omega, self.hbar),
            ),
            StateChoice::Rational => (
                StateFunction::rational(self.a, self.b, self.m, self.omega, self.hbar),
                StateFunction::rational(self.a, -self.b, self.m, self.omega, self.hbar),
            ),
            StateChoice::Bump => (
                StateFunction::bump(
                    self.a,
                    self.b,
                    self.bump_rq,
                    self.bump_rp,
                    self.m,
                    self.omega,
                    self.hbar,
                ),
                StateFunction::bump(
                    self.a,
                    -self.b,
                    self.bump_rq,
                    self.bump_rp,
                    self.m,
                    self.omega,
                    self.hbar,
                ),
            ),
        }
    }

    pub fn c_grid(&self) -> Vec<f64> {
        let n = self.c_points;
        (0..n)
            .map(|i| self.c_min + (self.c_max - self.c_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Every key echoed as key=value lines, for the manifest.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "character={}", self.character.name());
        let _ = writeln!(s, "state={}", self.state.name());
        for (k, v) in [
            ("hbar", self.hbar),
            ("m", self.m),
            ("omega", self.omega),
            ("lambda", self.lambda),
            ("a", self.a),
            ("b", self.b),
            ("bump_rq", self.bump_rq),
            ("bump_rp", self.bump_rp),
            ("grid_l", self.grid_l),
            ("t_final", self.t_final),
            ("dt", self.dt),
            ("c_min", self.c_min),
            ("c_max", self.c_max),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "grid_n={}", self.grid_n);
        let _ = writeln!(s, "snap_every={}", self.snap_every);
        let _ = writeln!(s, "c_points={}", self.c_points);
        let _ = writeln!(s, "out={}", self.out);
        s
    }
}
