use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    AflConst,
    Fast,
    Linear,
    Quad,
    FastPlus,
    LinearPlus,
    QuadPlus,
}

impl Mode {
    pub const ALL: [Mode; 7] =
        [Mode::AflConst, Mode::Fast, Mode::Linear, Mode::Quad, Mode::FastPlus, Mode::LinearPlus, Mode::QuadPlus];

    pub fn name(self) -> &'static str {
        match self {
            Mode::AflConst => "AFL_CONST",
            Mode::Fast => "FAST",
            Mode::Linear => "LINEAR",
            Mode::Quad => "QUAD",
            Mode::FastPlus => "FAST_PLUS",
            Mode::LinearPlus => "LINEAR_PLUS",
            Mode::QuadPlus => "QUAD_PLUS",
        }
    }

    pub fn is_plus(self) -> bool {
        matches!(self, Mode::FastPlus | Mode::LinearPlus | Mode::QuadPlus)
    }

    /// The unbounded schedule a PLUS mode lifts.
    pub fn base(self) -> Mode {
        match self {
            Mode::FastPlus => Mode::Fast,
            Mode::LinearPlus => Mode::Linear,
            Mode::QuadPlus => Mode::Quad,
            m => m,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_uppercase().replace('-', "_");
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == wanted)
            .ok_or_else(|| format!("unknown schedule `{s}`"))
    }
}

/// How the `g(s) / f` factor is rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyRounding {
    /// `floor(g(s) / f)` in integers before scaling, as AFLFast computes it.
    #[default]
    IntegerFactor,
    /// `g(s) / f` kept real until the final floor.
    RealValued,
}

/// When a seed's selection count `s` advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Only when the advanced count yields at least one input.
    #[default]
    OnProductiveSelection,
    /// On every selection.
    EverySelection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub mode: Mode,
    #[serde(default = "default_alpha")]
    pub alpha: u64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(rename = "upper_m", default = "default_upper")]
    pub upper: u64,
    #[serde(rename = "lower_l", default = "default_lower")]
    pub lower: u64,
    #[serde(default)]
    pub rounding: EnergyRounding,
    #[serde(default)]
    pub selection: SelectionRule,
}

fn default_alpha() -> u64 {
    512
}

fn default_beta() -> f64 {
    1.0
}

fn default_upper() -> u64 {
    4096
}

fn default_lower() -> u64 {
    16
}

impl ScheduleParams {
    pub fn new(mode: Mode) -> Self {
        ScheduleParams {
            mode,
            alpha: default_alpha(),
            beta: default_beta(),
            upper: default_upper(),
            lower: default_lower(),
            rounding: EnergyRounding::IntegerFactor,
            selection: SelectionRule::OnProductiveSelection,
        }
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        ScheduleParams { mode, ..self }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.alpha == 0 {
            return Err("alpha must be positive".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err("beta must be a positive finite number".into());
        }
        if self.lower > self.upper {
            return Err("lower bound L must not exceed upper bound M".into());
        }
        Ok(())
    }
}

/// Growth term of each schedule; saturates instead of overflowing.
fn growth(mode: Mode, s: u32) -> u128 {
    let s128 = u128::from(s);
    match mode.base() {
        Mode::Fast => {
            if s < 128 {
                1u128 << s
            } else {
                u128::MAX
            }
        }
        Mode::Linear => s128,
        Mode::Quad => s128 * s128,
        _ => unreachable!("constant schedule has no growth term"),
    }
}

/// Energy of a seed selected for the `s`-th time whose path has been
/// exercised `f` times.
///
/// Base modes compute `floor(min(alpha / beta * g(s) / f, M))` with
/// `g(s)` = `2^s`, `s` or `s^2`; PLUS modes lift that to at least `L`.
/// `f = 0` counts as 1.
pub fn energy(params: &ScheduleParams, s: u32, f: u64) -> u64 {
    if params.mode == Mode::AflConst {
        return params.alpha;
    }
    let f = f.max(1);
    let g = growth(params.mode, s);
    let alpha = params.alpha as f64;
    let raw = match params.rounding {
        EnergyRounding::IntegerFactor => alpha * (g / u128::from(f)) as f64 / params.beta,
        EnergyRounding::RealValued => alpha * g as f64 / f as f64 / params.beta,
    };
    let base = raw.min(params.upper as f64).floor() as u64;
    if params.mode.is_plus() {
        base.max(params.lower)
    } else {
        base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mode: Mode, alpha: u64, beta: f64, upper: u64, lower: u64) -> ScheduleParams {
        ScheduleParams { alpha, beta, upper, lower, ..ScheduleParams::new(mode) }
    }

    #[test]
    fn worked_values() {
        assert_eq!(energy(&p(Mode::Fast, 64, 2.0, 1024, 16), 3, 4), 64);
        assert_eq!(energy(&p(Mode::Fast, 1024, 1.0, 1000, 16), 20, 1), 1000);
        assert_eq!(energy(&p(Mode::Fast, 16, 1.0, 4096, 16), 0, 1_000_000), 0);
        assert_eq!(energy(&p(Mode::FastPlus, 16, 1.0, 4096, 16), 0, 1_000_000), 16);
        assert_eq!(energy(&p(Mode::Linear, 512, 1.0, 4096, 16), 0, 7), 0);
        let lin = energy(&p(Mode::Linear, 10, 1.0, 1 << 20, 1), 3, 3);
        let quad = energy(&p(Mode::Quad, 10, 1.0, 1 << 20, 1), 3, 3);
        assert_eq!(quad, 3 * lin);
    }

    #[test]
    fn huge_selection_counts_saturate() {
        for mode in [Mode::Fast, Mode::Linear, Mode::Quad] {
            for rounding in [EnergyRounding::IntegerFactor, EnergyRounding::RealValued] {
                let params = ScheduleParams { rounding, ..ScheduleParams::new(mode) };
                assert_eq!(energy(&params, u32::MAX, 1), 4096);
            }
        }
    }

    #[test]
    fn rounding_modes_differ_on_fractional_factor() {
        let int = ScheduleParams::new(Mode::Fast);
        let real = ScheduleParams { rounding: EnergyRounding::RealValued, ..int };
        // 2^2 / 5 = 0.8
        assert_eq!(energy(&int, 2, 5), 0);
        assert_eq!(energy(&real, 2, 5), 409);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.name().parse::<Mode>(), Ok(m));
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert_eq!("fast-plus".parse::<Mode>(), Ok(Mode::FastPlus));
        assert!("slow".parse::<Mode>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ScheduleParams::new(Mode::Fast).validate().is_ok());
        assert!(p(Mode::Fast, 0, 1.0, 10, 1).validate().is_err());
        assert!(p(Mode::Fast, 1, 0.0, 10, 1).validate().is_err());
        assert!(p(Mode::Fast, 1, 1.0, 10, 11).validate().is_err());
    }
}
