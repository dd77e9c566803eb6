//! Run configuration: one JSON document per run.
//!
//! Every section except `geometry`, `materials` and `source` has defaults;
//! the effective configuration (with defaults filled in) is echoed next to
//! each output and parses back to the same value.

use serde::{Deserialize, Serialize};

use calr3d_core::analysis::{DetectorConfig, GapCondition, GrowthRule, MaterialFamily, PlateauRule};
use calr3d_core::{FoldedGeometry, Mat3, MaterialParams, MultipoleSource, SolveOptions, Vec3};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub materials: MaterialsConfig,
    pub source: SourceConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub lemma: LemmaConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub r_i: f64,
    pub r_e: f64,
    pub r_0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsConfig {
    pub eps_c: f64,
    pub eps_s: f64,
    /// Single loss value, for `solve` and `field`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Loss grid, for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<DeltaGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeltaGrid {
    /// `δ_k = ρ^k`, `k = 3..=k_max` bounded by `n_max` and the float range.
    Canonical,
    /// `δ_k = ρ^k` for `k = from..=to`.
    RhoPowers { from: u32, to: u32 },
    /// `per_decade` points per decade from `10^from` down to `10^to`.
    Log10 { from: f64, to: f64, per_decade: u32 },
    Values { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Dipole { position: [f64; 3], moment: [f64; 3] },
    Quadrupole { position: [f64; 3], matrix: [[f64; 3]; 3] },
    /// Coefficients `f_n^k` in the order `n = 0, 1, …; k = -n..=n`.
    Raw { radius: f64, coefficients: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub n_max: usize,
    pub tail_tolerance: f64,
    pub tail_window: usize,
    pub detector: DetectorSettings,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        NumericsConfig {
            n_max: o.n_max,
            tail_tolerance: o.tail_tolerance,
            tail_window: o.tail_window,
            detector: DetectorSettings::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateauKind {
    OneSided,
    TotalVariation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSettings {
    pub growth_per_decade: f64,
    pub growth_decades: f64,
    pub plateau: PlateauKind,
    pub plateau_tolerance: f64,
    pub plateau_decades: f64,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        DetectorSettings::from(DetectorConfig::default())
    }
}

impl From<DetectorConfig> for DetectorSettings {
    fn from(d: DetectorConfig) -> Self {
        let GrowthRule::MonotonePerDecade { factor } = d.growth;
        let (plateau, plateau_tolerance) = match d.plateau {
            PlateauRule::OneSided { tolerance } => (PlateauKind::OneSided, tolerance),
            PlateauRule::TotalVariation { tolerance } => (PlateauKind::TotalVariation, tolerance),
        };
        DetectorSettings {
            growth_per_decade: factor,
            growth_decades: d.growth_decades,
            plateau,
            plateau_tolerance,
            plateau_decades: d.plateau_decades,
        }
    }
}

impl DetectorSettings {
    pub fn to_detector(&self) -> DetectorConfig {
        let tolerance = self.plateau_tolerance;
        DetectorConfig {
            growth: GrowthRule::MonotonePerDecade { factor: self.growth_per_decade },
            growth_decades: self.growth_decades,
            plateau: match self.plateau {
                PlateauKind::OneSided => PlateauRule::OneSided { tolerance },
                PlateauKind::TotalVariation => PlateauRule::TotalVariation { tolerance },
            },
            plateau_decades: self.plateau_decades,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub plane: Plane,
    /// Half-width of the square grid, centered on the origin.
    pub extent: f64,
    /// Points per axis.
    pub resolution: usize,
    /// Coordinate along the plane normal.
    pub offset: f64,
    /// Points closer than this to an interface sphere or a point source are
    /// skipped.
    pub skip_distance: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { plane: Plane::Xz, extent: 6.0, resolution: 61, offset: 0.0, skip_distance: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub critical_radius: bool,
    pub tolerance: f64,
    pub direction: [f64; 3],
    /// Index sequence for the gap functional; consecutive degrees if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_sequence: Option<Vec<usize>>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig { critical_radius: false, tolerance: 0.02, direction: [0.0, 0.0, 1.0], gap_sequence: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaConfig {
    pub degrees: Vec<usize>,
    pub draws: usize,
    pub samples: usize,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { degrees: vec![1, 2, 5, 10, 25, 50], draws: 20, samples: 10_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Main output file; `--out` takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Where `solve` writes the mode coefficient table, if anywhere.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes_path: Option<String>,
}

fn field_err(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {e}"))
}

impl RunConfig {
    /// Parse and validate. Syntax errors carry line and column; semantic
    /// errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.geometry()?;
        self.family()?;
        if let Some(d) = self.materials.delta {
            MaterialParams::new(self.materials.eps_c, self.materials.eps_s, d)
                .map_err(|e| field_err("materials.delta", e))?;
        }
        if let Some(grid) = &self.materials.delta_grid {
            match grid {
                DeltaGrid::RhoPowers { from, to } if from > to => {
                    return Err(field_err("materials.delta_grid", "`from` must not exceed `to`"));
                }
                DeltaGrid::Log10 { from, to, per_decade } if !(from > to) || *per_decade == 0 => {
                    return Err(field_err("materials.delta_grid", "need from > to and per_decade >= 1"));
                }
                _ => {}
            }
            let deltas = self.delta_grid()?;
            calr3d_core::analysis::check_grid(&deltas).map_err(|e| field_err("materials.delta_grid", e))?;
        }
        self.solve_options()?;
        self.detector()?;
        self.source()?;
        let f = &self.field;
        if f.resolution < 2 {
            return Err(field_err("field.resolution", "must be at least 2"));
        }
        if !(f.extent > 0.0 && f.extent.is_finite()) {
            return Err(field_err("field.extent", "must be positive and finite"));
        }
        if !(f.skip_distance >= 0.0) || !f.offset.is_finite() {
            return Err(field_err("field", "skip_distance must be >= 0 and offset finite"));
        }
        if !(self.classify.tolerance > 0.0) {
            return Err(field_err("classify.tolerance", "must be positive"));
        }
        if Vec3::from_array(self.classify.direction).unit().is_none() {
            return Err(field_err("classify.direction", "must be nonzero"));
        }
        if self.lemma.degrees.contains(&0) {
            return Err(field_err("lemma.degrees", "degrees must be >= 1"));
        }
        if self.lemma.samples == 0 {
            return Err(field_err("lemma.samples", "must be positive"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<FoldedGeometry, CliError> {
        let g = self.geometry;
        FoldedGeometry::derive(g.r_i, g.r_e, g.r_0).map_err(|e| field_err("geometry", e))
    }

    pub fn family(&self) -> Result<MaterialFamily, CliError> {
        MaterialFamily::new(self.materials.eps_c, self.materials.eps_s).map_err(|e| field_err("materials", e))
    }

    pub fn single_material(&self) -> Result<MaterialParams, CliError> {
        let d = self
            .materials
            .delta
            .ok_or_else(|| field_err("materials.delta", "a single loss value is required for this command"))?;
        MaterialParams::new(self.materials.eps_c, self.materials.eps_s, d).map_err(|e| field_err("materials.delta", e))
    }

    pub fn solve_options(&self) -> Result<SolveOptions, CliError> {
        let n = &self.numerics;
        if n.n_max == 0 {
            return Err(field_err("numerics.n_max", "must be positive"));
        }
        if !(n.tail_tolerance > 0.0) {
            return Err(field_err("numerics.tail_tolerance", "must be positive"));
        }
        if n.tail_window == 0 {
            return Err(field_err("numerics.tail_window", "must be positive"));
        }
        Ok(SolveOptions { n_max: n.n_max, tail_tolerance: n.tail_tolerance, tail_window: n.tail_window })
    }

    pub fn detector(&self) -> Result<DetectorConfig, CliError> {
        let d = self.numerics.detector.to_detector();
        d.validate().map_err(|e| field_err("numerics.detector", e))?;
        Ok(d)
    }

    pub fn source(&self) -> Result<MultipoleSource, CliError> {
        let n_max = self.numerics.n_max;
        let src = match &self.source {
            SourceConfig::Dipole { position, moment } => {
                MultipoleSource::dipole(Vec3::from_array(*moment), Vec3::from_array(*position), n_max)
            }
            SourceConfig::Quadrupole { position, matrix } => {
                MultipoleSource::quadrupole(Mat3(*matrix), Vec3::from_array(*position), n_max)
            }
            SourceConfig::Raw { radius, coefficients } => MultipoleSource::from_raw(*radius, coefficients.clone()),
        }
        .map_err(|e| field_err("source", e))?;
        let g = self.geometry()?;
        if !(src.support_radius() > g.r_e()) {
            return Err(field_err(
                "source",
                format!("support radius {} must exceed r_e = {}", src.support_radius(), g.r_e()),
            ));
        }
        Ok(src)
    }

    /// Loss values in decreasing order.
    pub fn delta_grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = self
            .materials
            .delta_grid
            .as_ref()
            .ok_or_else(|| field_err("materials.delta_grid", "a loss grid is required for this command"))?;
        let g = self.geometry()?;
        let rho = g.rho();
        let out = match grid {
            DeltaGrid::Canonical => calr3d_core::analysis::canonical_grid(&g, self.numerics.n_max),
            DeltaGrid::RhoPowers { from, to } => (*from..=*to).map(|k| rho.powi(k as i32)).collect(),
            DeltaGrid::Log10 { from, to, per_decade } => {
                let steps = ((from - to) * *per_decade as f64).round() as usize;
                (0..=steps).map(|i| 10f64.powf(from - i as f64 / *per_decade as f64)).collect()
            }
            DeltaGrid::Values { values } => values.clone(),
        };
        if out.is_empty() {
            return Err(field_err("materials.delta_grid", "grid is empty"));
        }
        Ok(out)
    }

    /// Gap condition matching the material pair: `GC1` when `ε_c = 1`.
    pub fn gap_condition(&self) -> GapCondition {
        if (self.materials.eps_c - 1.0).abs() <= 1e-12 {
            GapCondition::Gc1
        } else {
            GapCondition::Gc2
        }
    }
}
