use std::path::Path;

use serde::{Deserialize, Serialize};
use sflen_core::lds::{hug_band, region_bounds, DKind, EigRegion, InputKind, HUG_Q};
use sflen_core::learner::Variant;

use crate::error::{io, Error, Result};

/// Where the hidden eigenvalues come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionSpec {
    /// The hug band `[0.9a, a] ∪ [b, 1]` around the vanilla bad band at `q = 7/8`.
    A,
    /// The vanilla bad band at `q = 7/8`.
    B,
    Interval(f64, f64),
}

impl RegionSpec {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "a" | "A" => Some(RegionSpec::A),
            "b" | "B" => Some(RegionSpec::B),
            _ => {
                let (lo, hi) = s.strip_prefix("interval:")?.split_once(',')?;
                Some(RegionSpec::Interval(lo.trim().parse().ok()?, hi.trim().parse().ok()?))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            RegionSpec::A => "a".into(),
            RegionSpec::B => "b".into(),
            RegionSpec::Interval(lo, hi) => format!("interval:{lo},{hi}"),
        }
    }

    /// The region for horizon `T`, anchored at `q` for the named bands.
    pub fn resolve(&self, horizon: usize, q: f64) -> Result<EigRegion> {
        Ok(match *self {
            RegionSpec::A => hug_band(horizon, q)?,
            RegionSpec::B => region_bounds(horizon, q, Variant::Vanilla)?,
            RegionSpec::Interval(lo, hi) => EigRegion::interval(lo, hi)?,
        })
    }
}

impl Serialize for RegionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for RegionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        RegionSpec::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown region {s:?}, expected a, b or interval:LO,HI")))
    }
}

macro_rules! str_serde {
    ($t:ty, $what:literal) => {
        impl Serialize for Wrap<$t> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.0.as_str())
            }
        }
        impl<'de> Deserialize<'de> for Wrap<$t> {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                <$t>::parse(&s).map(Wrap).ok_or_else(|| serde::de::Error::custom(format!(concat!("unknown ", $what, " {:?}"), s)))
            }
        }
    };
}

/// String (de)serialization for enums owned by the core crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrap<T>(pub T);

str_serde!(Variant, "variant");
str_serde!(InputKind, "input kind");

str_serde!(DKind, "D kind");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub q_grid: Vec<f64>,
    pub k: usize,
    pub variant: Wrap<Variant>,
    pub region: RegionSpec,
    /// `q` at which region `a` / `b` is placed.
    #[serde(default = "default_region_q")]
    pub region_q: f64,
    pub d_hidden: usize,
    pub d_in: usize,
    pub d_out: usize,
    pub seeds: Vec<u64>,
    pub r: f64,
    /// Overrides the default step scale when set.
    #[serde(default)]
    pub eta0: Option<f64>,
    /// Smoothing window; `max(1, T/100)` when absent.
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default = "default_inputs")]
    pub inputs: Wrap<InputKind>,
    #[serde(default = "default_d_kind")]
    pub d_kind: Wrap<DKind>,
    #[serde(default = "default_tol")]
    pub tol_opt: f64,
    /// Skip the full-context comparator (and so the regret table).
    #[serde(default)]
    pub skip_comparator: bool,
}

fn default_region_q() -> f64 {
    HUG_Q
}

fn default_inputs() -> Wrap<InputKind> {
    Wrap(InputKind::UnitSphere)
}

fn default_d_kind() -> Wrap<DKind> {
    Wrap(DKind::Zero)
}

fn default_tol() -> f64 {
    sflen_core::regret::DEFAULT_TOL_OPT
}

impl ExperimentConfig {
    /// `T = 2^12`, `d_hidden = 64`, `d_in = d_out = 8`, `k = 24`, three seeds,
    /// `r = 1` and the default step scale.
    pub fn desk() -> Self {
        ExperimentConfig {
            horizon: 1 << 12,
            q_grid: vec![0.5, 0.625, 0.75, 0.875, 1.0],
            k: 24,
            variant: Wrap(Variant::Vanilla),
            region: RegionSpec::A,
            region_q: HUG_Q,
            d_hidden: 64,
            d_in: 8,
            d_out: 8,
            seeds: vec![1, 2, 3],
            r: 1.0,
            eta0: None,
            window: None,
            inputs: default_inputs(),
            d_kind: default_d_kind(),
            tol_opt: default_tol(),
            skip_comparator: false,
        }
    }

    /// Full scale: `T = 2^14`, `d_hidden = 512`.
    pub fn full() -> Self {
        ExperimentConfig { horizon: 1 << 14, d_hidden: 512, ..Self::desk() }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "desk" => Some(Self::desk()),
            "full" => Some(Self::full()),
            _ => None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn window(&self) -> usize {
        self.window.unwrap_or_else(|| sflen_core::aggregate::default_window(self.horizon))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.horizon < 2 {
            return bad(format!("T = {} is too small", self.horizon));
        }
        if self.q_grid.is_empty() || self.q_grid.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return bad("q_grid must be non-empty with values in [0, 1]".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must be non-empty".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        let mut qs = self.q_grid.clone();
        qs.sort_by(f64::total_cmp);
        qs.dedup();
        if qs.len() != self.q_grid.len() {
            return bad("q_grid values must be distinct".into());
        }
        if self.d_hidden == 0 || self.d_in == 0 || self.d_out == 0 {
            return bad("dimensions must be positive".into());
        }
        let w = self.window();
        if w == 0 || w > self.horizon {
            return bad(format!("window {w} must lie in 1..=T"));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return bad("r must be positive".into());
        }
        if self.eta0.is_some_and(|e| !(e > 0.0 && e.is_finite())) {
            return bad("eta0 must be positive".into());
        }
        if !(self.tol_opt > 0.0) {
            return bad("tol_opt must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.region_q) {
            return bad("region_q must lie in [0, 1]".into());
        }
        if self.region.resolve(self.horizon, self.region_q)?.is_empty() {
            return bad(format!("region {} is empty at T = {}", self.region.name(), self.horizon));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut cfg = ExperimentConfig::desk();
        cfg.region = RegionSpec::Interval(0.5, 0.75);
        cfg.variant = Wrap(Variant::TwoAr);
        cfg.eta0 = Some(0.3);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert!(text.contains("\"T\": 4096") && text.contains("\"two-ar\"") && text.contains("interval:0.5,0.75"));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn defaults_fill_in() {
        let text = r#"{"T": 64, "q_grid": [1.0], "k": 4, "variant": "vanilla", "region": "a",
            "d_hidden": 4, "d_in": 1, "d_out": 1, "seeds": [0], "r": 1.0}"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.window(), 1);
        assert_eq!(cfg.inputs, Wrap(InputKind::UnitSphere));
        cfg.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        let base = ExperimentConfig::desk();
        for cfg in [
            ExperimentConfig { q_grid: vec![1.5], ..base.clone() },
            ExperimentConfig { seeds: vec![], ..base.clone() },
            ExperimentConfig { seeds: vec![1, 1], ..base.clone() },
            ExperimentConfig { window: Some(10_000), ..base.clone() },
            ExperimentConfig { r: 0.0, ..base.clone() },
            ExperimentConfig { region: RegionSpec::Interval(0.9, 0.1), ..base.clone() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(RegionSpec::parse("interval:0.1").is_none());
    }
}
