use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::snapshot::write_atomic;
use crate::analysis::{EstimateKind, EstimateParams, Family, Window};
use crate::ame::{EllipticSettings, EvolveSettings, Products};
use crate::error::{Error, Result};
use crate::gaugeforms::CoulombSettings;
use crate::spectral::TorusGrid;

/// What a run does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Simulate,
    Picard,
    Gaugefix,
    Estimates,
    Admissible,
    Residuals,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Simulate,
        Mode::Picard,
        Mode::Gaugefix,
        Mode::Estimates,
        Mode::Admissible,
        Mode::Residuals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Picard => "picard",
            Mode::Gaugefix => "gaugefix",
            Mode::Estimates => "estimates",
            Mode::Admissible => "admissible",
            Mode::Residuals => "residuals",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Initial data of the evolution modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DataKind {
    Zero,
    /// Band-limited random Coulomb data.
    Random,
    /// Gaussian bumps of width `bump_width`.
    Bumps,
    /// Wave variables read from `input`.
    Snapshot,
}

impl DataKind {
    fn name(self) -> &'static str {
        match self {
            DataKind::Zero => "zero",
            DataKind::Random => "random",
            DataKind::Bumps => "bumps",
            DataKind::Snapshot => "snapshot",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [DataKind::Zero, DataKind::Random, DataKind::Bumps, DataKind::Snapshot]
            .into_iter()
            .find(|d| d.name() == s)
    }
}

/// Everything a run needs. Loaded from a flat `key = value` file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: usize,
    pub side: f64,
    pub rank: usize,
    pub t_final: f64,
    pub dt: f64,
    pub snapshot_every: usize,
    pub cfl: f64,
    pub blowup_cap: f64,
    pub products: Products,
    pub elliptic_threshold: f64,
    pub elliptic_tol: f64,
    pub elliptic_max_iter: usize,
    pub coulomb_threshold: f64,
    pub coulomb_tol: f64,
    pub coulomb_max_iter: usize,
    pub data: DataKind,
    pub amplitude: f64,
    pub band: f64,
    pub bump_width: f64,
    pub input: Option<PathBuf>,
    pub seed: u64,
    pub picard_iterations: usize,
    pub residual_gate: f64,
    pub coulomb_gate: f64,
    pub picard_ratio_gate: f64,
    pub scale_lambda: f64,
    pub s: f64,
    pub a: Option<f64>,
    pub theta: f64,
    pub epsilon: f64,
    pub estimates: Vec<EstimateKind>,
    pub samples: usize,
    pub frames: usize,
    pub duration: f64,
    pub window: Window,
    pub family: FamilyKind,
    pub lambda: f64,
    pub spread: f64,
    pub width: f64,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub s1: f64,
    pub s2: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub e_alpha: f64,
    pub e_beta: f64,
    pub a0_q: f64,
    pub p_tilde: f64,
    pub axis: usize,
    pub out: Option<PathBuf>,
}

/// Ensemble family selector; its parameters are separate keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Gaussian,
    Packets,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ep = EstimateParams::default();
        let el = EllipticSettings::default();
        Self {
            mode: Mode::Simulate,
            n: 64,
            side: 2.0 * PI,
            rank: 2,
            t_final: 0.5,
            dt: 0.05,
            snapshot_every: 1,
            cfl: 2.0,
            blowup_cap: 1e6,
            products: Products::Dealiased,
            elliptic_threshold: el.threshold,
            elliptic_tol: el.tol,
            elliptic_max_iter: el.max_iter,
            coulomb_threshold: 1.0,
            coulomb_tol: 1e-9,
            coulomb_max_iter: 200,
            data: DataKind::Random,
            amplitude: 0.02,
            band: 3.0,
            bump_width: 0.5,
            input: None,
            seed: 0,
            picard_iterations: 8,
            residual_gate: 1e-2,
            coulomb_gate: 1e-9,
            picard_ratio_gate: 0.7,
            scale_lambda: 2.0,
            s: ep.s,
            a: None,
            theta: ep.theta,
            epsilon: ep.epsilon,
            estimates: vec![EstimateKind::M1, EstimateKind::M1Generic],
            samples: 8,
            frames: 16,
            duration: 1.0,
            window: Window::Hann,
            family: FamilyKind::Gaussian,
            lambda: 8.0,
            spread: 0.02,
            width: 1.0,
            p: ep.p,
            q: ep.q,
            sigma: ep.sigma,
            s1: ep.s1,
            s2: ep.s2,
            e_a: ep.a,
            e_b: ep.b,
            e_alpha: ep.alpha,
            e_beta: ep.beta,
            a0_q: ep.a0_q,
            p_tilde: ep.p_tilde,
            axis: ep.axis,
            out: None,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ConfigParse {
        line,
        message: message.into(),
    }
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigInvalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Accepts plain floats and multiples of π such as `2pi`.
fn parse_f64(v: &str) -> Option<f64> {
    if let Some(head) = v.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let c = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
        return Some(c * PI);
    }
    v.parse::<f64>().ok()
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl RunConfig {
    /// Keys in the order [`RunConfig::to_text`] writes them.
    pub const KEYS: [&'static str; 53] = [
        "mode",
        "N",
        "L",
        "rank",
        "T",
        "dt",
        "snapshot_every",
        "cfl",
        "blowup_cap",
        "products",
        "elliptic_threshold",
        "elliptic_tol",
        "elliptic_max_iter",
        "coulomb_threshold",
        "coulomb_tol",
        "coulomb_max_iter",
        "data",
        "amplitude",
        "band",
        "bump_width",
        "input",
        "seed",
        "picard_iterations",
        "residual_gate",
        "coulomb_gate",
        "picard_ratio_gate",
        "scale_lambda",
        "s",
        "a",
        "theta",
        "epsilon",
        "estimates",
        "samples",
        "frames",
        "duration",
        "window",
        "family",
        "lambda",
        "spread",
        "width",
        "p",
        "q",
        "sigma",
        "s1",
        "s2",
        "e_a",
        "e_b",
        "e_alpha",
        "e_beta",
        "a0_q",
        "p_tilde",
        "axis",
        "out",
    ];

    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// skipped; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(parse_err(line_no, "empty key"));
            }
            if !seen.insert(k.to_string()) {
                return Err(parse_err(line_no, format!("key `{k}` given twice")));
            }
            cfg.set(k, v).map_err(|m| parse_err(line_no, m))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, k: &str, v: &str) -> std::result::Result<(), String> {
        let float = || parse_f64(v).ok_or_else(|| format!("`{k}` expects a number, got {v:?}"));
        let int = || v.parse::<usize>().map_err(|_| format!("`{k}` expects a non-negative integer, got {v:?}"));
        match k {
            "mode" => self.mode = Mode::parse(v).ok_or_else(|| format!("unknown mode {v:?}"))?,
            "N" => self.n = int()?,
            "L" => self.side = float()?,
            "rank" => self.rank = int()?,
            "T" => self.t_final = float()?,
            "dt" => self.dt = float()?,
            "snapshot_every" => self.snapshot_every = int()?,
            "cfl" => self.cfl = float()?,
            "blowup_cap" => self.blowup_cap = float()?,
            "products" => {
                self.products = match v {
                    "dealiased" => Products::Dealiased,
                    "plain" => Products::Plain,
                    _ => return Err(format!("`products` must be dealiased or plain, got {v:?}")),
                }
            }
            "elliptic_threshold" => self.elliptic_threshold = float()?,
            "elliptic_tol" => self.elliptic_tol = float()?,
            "elliptic_max_iter" => self.elliptic_max_iter = int()?,
            "coulomb_threshold" => self.coulomb_threshold = float()?,
            "coulomb_tol" => self.coulomb_tol = float()?,
            "coulomb_max_iter" => self.coulomb_max_iter = int()?,
            "data" => self.data = DataKind::parse(v).ok_or_else(|| format!("unknown data kind {v:?}"))?,
            "amplitude" => self.amplitude = float()?,
            "band" => self.band = float()?,
            "bump_width" => self.bump_width = float()?,
            "input" => self.input = Some(PathBuf::from(v)),
            "seed" => self.seed = v.parse().map_err(|_| format!("`seed` expects an integer, got {v:?}"))?,
            "picard_iterations" => self.picard_iterations = int()?,
            "residual_gate" => self.residual_gate = float()?,
            "coulomb_gate" => self.coulomb_gate = float()?,
            "picard_ratio_gate" => self.picard_ratio_gate = float()?,
            "scale_lambda" => self.scale_lambda = float()?,
            "s" => self.s = float()?,
            "a" => self.a = Some(float()?),
            "theta" => self.theta = float()?,
            "epsilon" => self.epsilon = float()?,
            "estimates" => {
                self.estimates = v
                    .split(',')
                    .map(|s| EstimateKind::parse(s.trim()).map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "samples" => self.samples = int()?,
            "frames" => self.frames = int()?,
            "duration" => self.duration = float()?,
            "window" => {
                self.window = match v {
                    "hann" => Window::Hann,
                    "none" => Window::None,
                    _ => return Err(format!("`window` must be hann or none, got {v:?}")),
                }
            }
            "family" => {
                self.family = match v {
                    "gaussian" => FamilyKind::Gaussian,
                    "packets" => FamilyKind::Packets,
                    _ => return Err(format!("`family` must be gaussian or packets, got {v:?}")),
                }
            }
            "lambda" => self.lambda = float()?,
            "spread" => self.spread = float()?,
            "width" => self.width = float()?,
            "p" => self.p = float()?,
            "q" => self.q = float()?,
            "sigma" => self.sigma = float()?,
            "s1" => self.s1 = float()?,
            "s2" => self.s2 = float()?,
            "e_a" => self.e_a = float()?,
            "e_b" => self.e_b = float()?,
            "e_alpha" => self.e_alpha = float()?,
            "e_beta" => self.e_beta = float()?,
            "a0_q" => self.a0_q = float()?,
            "p_tilde" => self.p_tilde = float()?,
            "axis" => self.axis = int()?,
            "out" => self.out = Some(PathBuf::from(v)),
            _ => return Err(format!("unknown key `{k}`")),
        }
        Ok(())
    }

    /// Checks ranges; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {x}")))
            }
        };
        if self.n == 0 {
            return Err(invalid("N", "must be positive"));
        }
        positive("L", self.side)?;
        TorusGrid::new(self.n, self.side).map_err(|e| invalid("N", e.to_string()))?;
        if self.rank < 2 {
            return Err(invalid("rank", format!("must be at least 2, got {}", self.rank)));
        }
        positive("T", self.t_final)?;
        positive("dt", self.dt)?;
        if self.snapshot_every == 0 {
            return Err(invalid("snapshot_every", "must be positive"));
        }
        positive("cfl", self.cfl)?;
        positive("blowup_cap", self.blowup_cap)?;
        positive("elliptic_threshold", self.elliptic_threshold)?;
        positive("elliptic_tol", self.elliptic_tol)?;
        if self.elliptic_max_iter == 0 {
            return Err(invalid("elliptic_max_iter", "must be positive"));
        }
        positive("coulomb_threshold", self.coulomb_threshold)?;
        positive("coulomb_tol", self.coulomb_tol)?;
        if self.coulomb_max_iter == 0 {
            return Err(invalid("coulomb_max_iter", "must be positive"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("amplitude", "must be non-negative and finite"));
        }
        positive("band", self.band)?;
        positive("bump_width", self.bump_width)?;
        if self.data == DataKind::Snapshot && self.input.is_none() {
            return Err(invalid("input", "required when data = snapshot"));
        }
        if self.picard_iterations == 0 {
            return Err(invalid("picard_iterations", "must be positive"));
        }
        positive("residual_gate", self.residual_gate)?;
        positive("coulomb_gate", self.coulomb_gate)?;
        positive("picard_ratio_gate", self.picard_ratio_gate)?;
        positive("scale_lambda", self.scale_lambda)?;
        positive("s", self.s)?;
        if self.estimates.is_empty() {
            return Err(invalid("estimates", "needs at least one kind"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be positive"));
        }
        if self.frames < crate::analysis::MIN_FRAMES {
            return Err(invalid(
                "frames",
                format!("must be at least {}", crate::analysis::MIN_FRAMES),
            ));
        }
        positive("duration", self.duration)?;
        positive("lambda", self.lambda)?;
        positive("width", self.width)?;
        if !(self.spread >= 0.0) {
            return Err(invalid("spread", "must be non-negative"));
        }
        if self.axis != 1 && self.axis != 2 {
            return Err(invalid("axis", "must be 1 or 2"));
        }
        Ok(())
    }

    /// Normalized text: every key in [`RunConfig::KEYS`] order, unset
    /// optional keys omitted. `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("mode", self.mode.name().into());
        put("N", self.n.to_string());
        put("L", fmt_f64(self.side));
        put("rank", self.rank.to_string());
        put("T", fmt_f64(self.t_final));
        put("dt", fmt_f64(self.dt));
        put("snapshot_every", self.snapshot_every.to_string());
        put("cfl", fmt_f64(self.cfl));
        put("blowup_cap", fmt_f64(self.blowup_cap));
        put(
            "products",
            match self.products {
                Products::Dealiased => "dealiased",
                Products::Plain => "plain",
            }
            .into(),
        );
        put("elliptic_threshold", fmt_f64(self.elliptic_threshold));
        put("elliptic_tol", fmt_f64(self.elliptic_tol));
        put("elliptic_max_iter", self.elliptic_max_iter.to_string());
        put("coulomb_threshold", fmt_f64(self.coulomb_threshold));
        put("coulomb_tol", fmt_f64(self.coulomb_tol));
        put("coulomb_max_iter", self.coulomb_max_iter.to_string());
        put("data", self.data.name().into());
        put("amplitude", fmt_f64(self.amplitude));
        put("band", fmt_f64(self.band));
        put("bump_width", fmt_f64(self.bump_width));
        if let Some(p) = &self.input {
            put("input", p.display().to_string());
        }
        put("seed", self.seed.to_string());
        put("picard_iterations", self.picard_iterations.to_string());
        put("residual_gate", fmt_f64(self.residual_gate));
        put("coulomb_gate", fmt_f64(self.coulomb_gate));
        put("picard_ratio_gate", fmt_f64(self.picard_ratio_gate));
        put("scale_lambda", fmt_f64(self.scale_lambda));
        put("s", fmt_f64(self.s));
        if let Some(a) = self.a {
            put("a", fmt_f64(a));
        }
        put("theta", fmt_f64(self.theta));
        put("epsilon", fmt_f64(self.epsilon));
        put(
            "estimates",
            self.estimates.iter().map(|k| k.name()).collect::<Vec<_>>().join(","),
        );
        put("samples", self.samples.to_string());
        put("frames", self.frames.to_string());
        put("duration", fmt_f64(self.duration));
        put(
            "window",
            match self.window {
                Window::Hann => "hann",
                Window::None => "none",
            }
            .into(),
        );
        put(
            "family",
            match self.family {
                FamilyKind::Gaussian => "gaussian",
                FamilyKind::Packets => "packets",
            }
            .into(),
        );
        put("lambda", fmt_f64(self.lambda));
        put("spread", fmt_f64(self.spread));
        put("width", fmt_f64(self.width));
        put("p", fmt_f64(self.p));
        put("q", fmt_f64(self.q));
        put("sigma", fmt_f64(self.sigma));
        put("s1", fmt_f64(self.s1));
        put("s2", fmt_f64(self.s2));
        put("e_a", fmt_f64(self.e_a));
        put("e_b", fmt_f64(self.e_b));
        put("e_alpha", fmt_f64(self.e_alpha));
        put("e_beta", fmt_f64(self.e_beta));
        put("a0_q", fmt_f64(self.a0_q));
        put("p_tilde", fmt_f64(self.p_tilde));
        put("axis", self.axis.to_string());
        if let Some(p) = &self.out {
            put("out", p.display().to_string());
        }
        out
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n, self.side)
    }

    pub fn elliptic(&self) -> EllipticSettings {
        EllipticSettings {
            threshold: self.elliptic_threshold,
            tol: self.elliptic_tol,
            max_iter: self.elliptic_max_iter,
            products: self.products,
        }
    }

    pub fn evolve_settings(&self) -> EvolveSettings {
        EvolveSettings {
            dt: self.dt,
            snapshot_every: self.snapshot_every,
            cfl: self.cfl,
            blowup_cap: self.blowup_cap,
            diagnostics: true,
            products: self.products,
            elliptic: self.elliptic(),
        }
    }

    pub fn coulomb(&self) -> CoulombSettings {
        CoulombSettings {
            tol: self.coulomb_tol,
            max_iter: self.coulomb_max_iter,
            threshold: self.coulomb_threshold,
            s: self.s,
        }
    }

    pub fn estimate_params(&self) -> EstimateParams {
        EstimateParams {
            s: self.s,
            theta: self.theta,
            epsilon: self.epsilon,
            p: self.p,
            q: self.q,
            sigma: self.sigma,
            s1: self.s1,
            s2: self.s2,
            a: self.e_a,
            b: self.e_b,
            alpha: self.e_alpha,
            beta: self.e_beta,
            a0_q: self.a0_q,
            p_tilde: self.p_tilde,
            axis: self.axis,
        }
    }

    pub fn family_spec(&self) -> Family {
        match self.family {
            FamilyKind::Gaussian => Family::Gaussian { band: self.band },
            FamilyKind::Packets => Family::WavePackets {
                lambda: self.lambda,
                spread: self.spread,
                width: self.width,
            },
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::parse(&text)
}

pub fn save_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    write_atomic(path, cfg.to_text().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let c = RunConfig::parse("mode = admissible\nN = 32\nL = 2pi\n").unwrap();
        assert_eq!(c.mode, Mode::Admissible);
        assert_eq!(c.n, 32);
        assert_eq!(c.side, 2.0 * PI);
        assert_eq!(c.dt, RunConfig::default().dt);
    }

    #[test]
    fn zero_grid_names_the_field() {
        match RunConfig::parse("N = 0\n") {
            Err(Error::ConfigInvalid { field, .. }) => assert_eq!(field, "N"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        match RunConfig::parse("# header\nmode = simulate\nbogus = 1\n") {
            Err(Error::ConfigParse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            RunConfig::parse("dt 0.1"),
            Err(Error::ConfigParse { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("dt = 0.1\ndt = 0.2"),
            Err(Error::ConfigParse { line: 2, .. })
        ));
    }

    #[test]
    fn normalized_text_round_trips() {
        let c = RunConfig::parse("mode = estimates\nestimates = M1, ell\na = 0.2\ninput = x.bin\nelliptic_tol = 1e-11\n")
            .unwrap();
        let text = c.to_text();
        let d = RunConfig::parse(&text).unwrap();
        assert_eq!(c, d);
        assert_eq!(text, d.to_text());
    }
}
