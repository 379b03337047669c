//! Experiment configuration: JSON schema and validating loader.
//!
//! ```json
//! {
//!   "group": {"type": "A", "rank": 1},
//!   "generators": [],
//!   "lambda": "log_anticanonical",
//!   "boundary": [1],
//!   "places": ["inf"],
//!   "grid": {"min": 1000, "max": 100000, "per_decade": 12, "doubling": true},
//!   "budget": 20000000000,
//!   "precision": {"arch_tol": 1e-12, "guard": 1e-9},
//!   "zeta": {"s": [3.0], "prime_cutoff": 10000, "delta": true, "q": [2, 3, 5], "depth": 64},
//!   "tolerances": {"a": 0.1, "doubling_band": [0.9, 1.1]},
//!   "output": {"dir": "out", "points": false}
//! }
//! ```
//!
//! Indices in `generators` and `boundary` are 1-based. `lambda` is either a
//! coefficient list (integers, decimals or `"p/q"` strings) or one of
//! `"anticanonical"`, `"log_anticanonical"`. `grid` may instead be
//! `{"thresholds": [...]}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagram_action::{build_action_one_based, DiagramAction};
use crate::enumerate::{EnumOptions, DEFAULT_BUDGET, DEFAULT_GUARD};
use crate::error::{Error, Result};
use crate::fit::Tolerances;
use crate::heights::DEFAULT_ARCH_TOL;
use crate::picard::{anticanonical, log_anticanonical, BoundarySelection, DivisorVector};
use crate::place::{normalize_places, Place};
use crate::root_system::{build_root_system, RootSystem, TypeLetter};
use crate::zeta::DEFAULT_DEPTH;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(rename = "type")]
    pub type_letter: TypeLetter,
    pub rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedLambda {
    Anticanonical,
    LogAnticanonical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Named(NamedLambda),
    Explicit(DivisorVector),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit {
        thresholds: Vec<f64>,
    },
    Geometric {
        min: f64,
        max: f64,
        #[serde(default = "default_per_decade")]
        per_decade: usize,
        #[serde(default = "yes")]
        doubling: bool,
    },
}

fn default_per_decade() -> usize {
    12
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSpec {
    #[serde(default = "default_arch_tol")]
    pub arch_tol: f64,
    #[serde(default = "default_guard")]
    pub guard: f64,
}

fn default_arch_tol() -> f64 {
    DEFAULT_ARCH_TOL
}

fn default_guard() -> f64 {
    DEFAULT_GUARD
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        Self {
            arch_tol: DEFAULT_ARCH_TOL,
            guard: DEFAULT_GUARD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaSpec {
    pub s: Vec<f64>,
    #[serde(default = "default_cutoff")]
    pub prime_cutoff: u64,
    #[serde(default = "yes")]
    pub delta: bool,
    #[serde(default = "default_q")]
    pub q: Vec<u64>,
    #[serde(default = "default_depth")]
    pub depth: u32,
}

fn default_cutoff() -> u64 {
    10_000
}

fn default_q() -> Vec<u64> {
    vec![2, 3, 5]
}

fn default_depth() -> u32 {
    DEFAULT_DEPTH
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    #[serde(default = "default_tol_a")]
    pub a: f64,
    #[serde(default = "default_band")]
    pub doubling_band: (f64, f64),
}

fn default_tol_a() -> f64 {
    0.1
}

fn default_band() -> (f64, f64) {
    (0.9, 1.1)
}

impl Default for TolerancesSpec {
    fn default() -> Self {
        Self {
            a: default_tol_a(),
            doubling_band: default_band(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub points: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            points: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupSpec,
    #[serde(default)]
    pub generators: Vec<Vec<usize>>,
    pub lambda: LambdaSpec,
    #[serde(default)]
    pub boundary: Vec<usize>,
    #[serde(default = "default_places")]
    pub places: Vec<Place>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub precision: PrecisionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ZetaSpec>,
    #[serde(default)]
    pub tolerances: TolerancesSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_places() -> Vec<Place> {
    vec![Place::Infinite]
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

/// A configuration checked against every module precondition.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub rs: RootSystem,
    pub da: DiagramAction,
    pub lam: DivisorVector,
    pub sel: BoundarySelection,
    pub places: Vec<Place>,
    pub thresholds: Option<Vec<f64>>,
}

impl Experiment {
    pub fn enum_options(&self) -> EnumOptions {
        EnumOptions {
            budget: self.config.budget,
            guard: self.config.precision.guard,
            arch_tol: self.config.precision.arch_tol,
            list_points: self.config.output.points,
            ..Default::default()
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            a: self.config.tolerances.a,
            doubling_band: self.config.tolerances.doubling_band,
        }
    }

    pub fn require_thresholds(&self) -> Result<&[f64]> {
        self.thresholds
            .as_deref()
            .ok_or_else(|| Error::Config("this subcommand needs a \"grid\"".into()))
    }

    pub fn require_zeta(&self) -> Result<&ZetaSpec> {
        self.config
            .zeta
            .as_ref()
            .ok_or_else(|| Error::Config("this subcommand needs a \"zeta\" section".into()))
    }
}

/// Geometric grid with `per_decade` points per factor of ten, optionally
/// merged with the doubling ladder `min 2^k`.
pub fn build_grid(spec: &GridSpec) -> Result<Vec<f64>> {
    let mut out = match spec {
        GridSpec::Explicit { thresholds } => thresholds.clone(),
        GridSpec::Geometric {
            min,
            max,
            per_decade,
            doubling,
        } => {
            if !(*min > 0.0 && max >= min && max.is_finite()) {
                return Err(Error::Config(format!("bad grid range [{min}, {max}]")));
            }
            if *per_decade == 0 {
                return Err(Error::Config("per_decade must be positive".into()));
            }
            let steps = ((max / min).log10() * *per_decade as f64 + 1e-9).floor() as usize;
            let mut g: Vec<f64> = (0..=steps)
                .map(|i| tidy(min * 10f64.powf(i as f64 / *per_decade as f64)))
                .collect();
            if *doubling {
                let mut b = *min;
                while b <= max * (1.0 + 1e-12) {
                    g.push(b);
                    b *= 2.0;
                }
            }
            g
        }
    };
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if out.is_empty() || out.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::Config("thresholds must be finite and positive".into()));
    }
    Ok(out)
}

/// Snap values within rounding of an integer onto it, so decades land on
/// exact powers of ten.
fn tidy(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs() {
        r
    } else {
        x
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(self) -> Result<Experiment> {
        let rs = build_root_system(self.group.type_letter, self.group.rank)?;
        let da = build_action_one_based(&rs, &self.generators)?;
        let n = rs.rank();
        let zero_based: Vec<usize> = self
            .boundary
            .iter()
            .map(|&i| {
                if i == 0 || i > n {
                    Err(Error::IndexOutOfRange { index: i, rank: n })
                } else {
                    Ok(i - 1)
                }
            })
            .collect::<Result<_>>()?;
        let sel = BoundarySelection::new(n, zero_based)?;
        sel.check_orbit_stable(&da)?;
        let lam = match &self.lambda {
            LambdaSpec::Named(NamedLambda::Anticanonical) => anticanonical(&rs),
            LambdaSpec::Named(NamedLambda::LogAnticanonical) => log_anticanonical(&rs, &sel),
            LambdaSpec::Explicit(v) => v.clone(),
        };
        if lam.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: lam.len(),
            });
        }
        lam.check_action(&da)?;
        lam.require_effective_interior()?;
        let places = normalize_places(&self.places)?;
        let thresholds = self.grid.as_ref().map(build_grid).transpose()?;
        let p = &self.precision;
        if !(p.arch_tol > 0.0 && p.guard >= 0.0) {
            return Err(Error::Config("precision knobs must be positive".into()));
        }
        let t = &self.tolerances;
        if !(t.a > 0.0 && t.doubling_band.0 > 0.0 && t.doubling_band.0 <= t.doubling_band.1) {
            return Err(Error::Config("bad tolerances".into()));
        }
        if let Some(z) = &self.zeta {
            if z.s.is_empty() || z.s.iter().any(|s| !s.is_finite()) {
                return Err(Error::Config("zeta.s must be a nonempty list of reals".into()));
            }
            if z.prime_cutoff < 2 || z.depth == 0 {
                return Err(Error::Config("zeta.prime_cutoff >= 2 and zeta.depth >= 1 required".into()));
            }
            if let Some(q) = z.q.iter().find(|&&q| !crate::place::is_prime(q)) {
                return Err(Error::Config(format!("zeta.q contains non-prime {q}")));
            }
        }
        Ok(Experiment {
            config: self,
            rs,
            da,
            lam,
            sel,
            places,
            thresholds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SL2: &str = r#"{
        "group": {"type": "A", "rank": 1},
        "lambda": "log_anticanonical",
        "boundary": [1],
        "places": ["inf"],
        "grid": {"min": 1000, "max": 100000}
    }"#;

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_json(SL2).unwrap();
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        let full = r#"{
            "group": {"type": "A", "rank": 3},
            "generators": [[3, 2, 1]],
            "lambda": ["3/2", 2, "3/2"],
            "boundary": [1, 3],
            "places": ["inf", 3, 2],
            "grid": {"thresholds": [1, 2, 3]},
            "zeta": {"s": [2.5]},
            "output": {"dir": "x", "points": true}
        }"#;
        let c = ExperimentConfig::from_json(full).unwrap();
        assert_eq!(c, ExperimentConfig::from_json(&c.to_json()).unwrap());
        let e = c.validate().unwrap();
        assert_eq!(e.places, vec![Place::Infinite, Place::Prime(2), Place::Prime(3)]);
        assert_eq!(e.da.orbit_count(), 2);
    }

    #[test]
    fn resolves_named_lambda() {
        let e = ExperimentConfig::from_json(SL2).unwrap().validate().unwrap();
        assert_eq!(e.lam, DivisorVector::from_ints(&[1]));
        let g = e.thresholds.unwrap();
        assert_eq!(g[0], 1000.0);
        assert_eq!(*g.last().unwrap(), 100000.0);
        assert!(g.contains(&2000.0) && g.contains(&64000.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            r#"{"group": {"type": "A", "rank": 1}, "lambda": [0]}"#,
            r#"{"group": {"type": "A", "rank": 1}, "lambda": [1], "boundary": [2]}"#,
            r#"{"group": {"type": "A", "rank": 3}, "lambda": [1, 1, 2], "generators": [[3, 2, 1]]}"#,
            r#"{"group": {"type": "A", "rank": 3}, "lambda": [1, 1, 1], "generators": [[3, 2, 1]], "boundary": [1]}"#,
            r#"{"group": {"type": "A", "rank": 1}, "lambda": [1], "places": [2]}"#,
            r#"{"group": {"type": "A", "rank": 1}, "lambda": [1], "bogus": 1}"#,
            r#"{"group": {"type": "B", "rank": 1}, "lambda": [1]}"#,
            r#"{"group": {"type": "A", "rank": 1}, "lambda": [1], "grid": {"min": 10, "max": 1}}"#,
            r#"{"group": {"type": "A", "rank": 1}, "lambda": [1], "zeta": {"s": [3], "q": [4]}}"#,
        ];
        for b in bad {
            let r = ExperimentConfig::from_json(b).and_then(ExperimentConfig::validate);
            assert!(r.is_err(), "{b}");
        }
    }
}
