//! Run configuration, read from TOML.
//!
//! ```toml
//! [run]
//! algorithm = "ahcoa"      # ahcoa | alo | pso
//! objective = "sll"        # sll | bowl | tangential-bowl
//! seed = 2
//! iterations = 1000        # overrides the algorithm section
//!
//! [synthesis]
//! mode = "amplitude"       # amplitude | position
//! elements = 10
//! spacing = 0.5            # element spacing, or total aperture in position mode
//! target_sll_db = -40.0
//! fnbw_cap_deg = 50.0      # optional
//!
//! [bowl]
//! dim = 3
//! lower = -10.0
//! upper = 10.0
//!
//! [ahcoa]
//! population = 25
//! contraction = 0.85
//! ```
//!
//! Every section and key is optional; missing values take their defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ahcoa::AhcoaConfig;
use crate::array_model::{AngleGrid, DEFAULT_FLOOR_DB, DEFAULT_STEP_DEG};
use crate::baselines::{AloConfig, PsoConfig};
use crate::error::{Error, Result};
use crate::objectives::{
    bowl_objective, sll_cost, tangential_bowl_objective, Bounds, Objective, SynthesisMode,
    SynthesisSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ahcoa,
    Alo,
    Pso,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Sll,
    Bowl,
    TangentialBowl,
}

macro_rules! kebab_enum_text {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(Error::Config(format!("unknown value `{other}`"))),
                }
            }
        }
    };
}

kebab_enum_text!(Algorithm { Ahcoa => "ahcoa", Alo => "alo", Pso => "pso" });
kebab_enum_text!(ObjectiveKind { Sll => "sll", Bowl => "bowl", TangentialBowl => "tangential-bowl" });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub algorithm: Algorithm,
    pub objective: ObjectiveKind,
    pub seed: u64,
    pub iterations: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Ahcoa,
            objective: ObjectiveKind::Sll,
            seed: 0,
            iterations: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSection {
    pub mode: SynthesisMode,
    pub elements: usize,
    pub spacing: f64,
    pub target_sll_db: f64,
    pub fnbw_cap_deg: Option<f64>,
    pub grid_step_deg: f64,
    pub floor_db: f64,
}

impl Default for SynthesisSection {
    fn default() -> Self {
        Self {
            mode: SynthesisMode::Amplitude,
            elements: 10,
            spacing: 0.5,
            target_sll_db: -40.0,
            fnbw_cap_deg: None,
            grid_step_deg: DEFAULT_STEP_DEG,
            floor_db: DEFAULT_FLOOR_DB,
        }
    }
}

impl SynthesisSection {
    pub fn spec(&self) -> Result<SynthesisSpec> {
        let mut spec = match self.mode {
            SynthesisMode::Amplitude => {
                SynthesisSpec::amplitude(self.elements, self.spacing, self.target_sll_db)?
            }
            SynthesisMode::Position => {
                SynthesisSpec::position(self.elements, self.spacing, self.target_sll_db)?
            }
        };
        spec.fnbw_cap_deg = self.fnbw_cap_deg;
        spec.grid = AngleGrid::full(self.grid_step_deg)?;
        spec.floor_db = self.floor_db;
        spec.validate()?;
        Ok(spec)
    }
}

/// Box for the bowl objectives; the tangential bowl is always 2-dimensional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BowlSection {
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Default for BowlSection {
    fn default() -> Self {
        Self {
            dim: 2,
            lower: -500.0,
            upper: 500.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub synthesis: SynthesisSection,
    pub bowl: BowlSection,
    pub ahcoa: AhcoaConfig,
    pub alo: AloConfig,
    pub pso: PsoConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Copies the run seed and iteration count into the algorithm sections,
    /// so the sections alone describe the run.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.ahcoa.seed = self.run.seed;
        out.alo.seed = self.run.seed;
        out.pso.seed = self.run.seed;
        if let Some(n) = self.run.iterations {
            out.ahcoa.max_iterations = n;
            out.alo.max_iterations = n;
            out.pso.max_iterations = n;
        }
        out
    }

    /// The objective, plus the synthesis problem behind it for `sll`.
    pub fn objective(&self) -> Result<(Objective, Option<SynthesisSpec>)> {
        match self.run.objective {
            ObjectiveKind::Sll => {
                let spec = self.synthesis.spec()?;
                Ok((sll_cost(&spec)?, Some(spec)))
            }
            ObjectiveKind::Bowl => {
                let b = &self.bowl;
                let bounds = Bounds::uniform(b.dim, b.lower, b.upper)?;
                Ok((bowl_objective(bounds, vec![0.0; b.dim])?, None))
            }
            ObjectiveKind::TangentialBowl => {
                let bounds = Bounds::uniform(2, self.bowl.lower, self.bowl.upper)?;
                Ok((tangential_bowl_objective(bounds)?, None))
            }
        }
    }
}
