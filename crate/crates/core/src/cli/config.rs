use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agent::ScriptedPolicy;
use crate::episode::EpisodeConfig;
use crate::eval::EvalThresholds;
use crate::terrain::{Curriculum, TerrainParams};
use crate::worldgen::{
    build_tile_catalog, presets, ExampleMap, GenerationModel, TileCatalog, WfcOptions, DEFAULT_TILE_SIZE,
};

use super::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// WFC map of `width`×`height` tiles drawn from `catalog`.
    Wfc,
    /// Straight corridor `width` tiles long; `catalog` is ignored.
    Corridor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub layout: Layout,
    pub width: usize,
    pub height: usize,
    pub tile_size: f64,
    /// Height-field cell size (m); must divide the tile size.
    pub resolution: f64,
    /// `preset:<name>`, a catalog JSON file, or a plain-text symbol grid.
    pub catalog: String,
    pub pattern_size: usize,
    pub model: GenerationModel,
    pub max_restarts: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            layout: Layout::Wfc,
            width: 24,
            height: 24,
            tile_size: DEFAULT_TILE_SIZE,
            resolution: 0.1,
            catalog: "preset:mixed".into(),
            pattern_size: 2,
            model: GenerationModel::Adjacency,
            max_restarts: 100,
        }
    }
}

impl WorldConfig {
    pub fn wfc_options(&self) -> WfcOptions {
        WfcOptions { model: self.model, max_restarts: self.max_restarts }
    }

    /// Resolve the catalog reference. Relative paths are taken from `base`.
    pub fn load_catalog(&self, base: &Path) -> Result<TileCatalog, CliError> {
        let bad = |e: String| CliError::config(format!("catalog {:?}: {e}", self.catalog));
        if let Some(name) = self.catalog.strip_prefix("preset:") {
            return presets::catalog(name, self.pattern_size).map_err(|e| bad(e.to_string()));
        }
        let path = base.join(&self.catalog);
        let text = std::fs::read_to_string(&path).map_err(|e| bad(e.to_string()))?;
        if path.extension().is_some_and(|e| e == "json") {
            TileCatalog::from_json(&text).map_err(|e| bad(e.to_string()))
        } else {
            let ex = ExampleMap::parse_symbols(&text).map_err(|e| bad(e.to_string()))?;
            build_tile_catalog(&ex, self.pattern_size).map_err(|e| bad(e.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurriculumConfig {
    pub search: Curriculum,
    pub generations: usize,
    /// Proxy trials per parameter set.
    pub trials: usize,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig { search: Curriculum::default(), generations: 10, trials: 10 }
    }
}

/// The run configuration document shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub world: WorldConfig,
    pub terrain: TerrainParams,
    pub curriculum: CurriculumConfig,
    pub episode: EpisodeConfig,
    pub policy: ScriptedPolicy,
    pub eval: EvalThresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            world: WorldConfig::default(),
            terrain: TerrainParams::default(),
            curriculum: CurriculumConfig::default(),
            episode: EpisodeConfig::eval(),
            policy: ScriptedPolicy::default(),
            eval: EvalThresholds::default(),
        }
    }
}

impl RunConfig {
    /// Parse a config document. Keys that are absent, at any depth, keep the
    /// values of [`RunConfig::default`].
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let user: Value = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        let mut merged = serde_json::to_value(RunConfig::default()).expect("config serialises");
        merge(&mut merged, user);
        let cfg: RunConfig = serde_json::from_value(merged).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let w = &self.world;
        if w.width == 0 || w.height == 0 || w.pattern_size == 0 {
            return Err(CliError::config("world dimensions and pattern size must be positive"));
        }
        let ratio = w.tile_size / w.resolution;
        if !(w.resolution > 0.0) || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(CliError::config("resolution must evenly divide tile_size"));
        }
        self.terrain.validate().map_err(|e| CliError::config(e.to_string()))?;
        let c = &self.curriculum;
        c.search.space.validate().map_err(|e| CliError::config(e.to_string()))?;
        c.search.thresholds.validate().map_err(|e| CliError::config(e.to_string()))?;
        if c.search.population == 0 || c.trials == 0 {
            return Err(CliError::config("curriculum population and trials must be positive"));
        }
        self.episode.validate().map_err(CliError::config)?;
        self.policy.bounds.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(())
    }
}

/// Overlay `user` onto `base`. Tagged enums (objects with a `kind` key) are
/// replaced whole so variant fields never mix.
fn merge(base: &mut Value, user: Value) {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) if !u.contains_key("kind") => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, u) => *slot = u,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(RunConfig::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"seed": 1, "sede": 2}"#).is_err());
        assert!(RunConfig::from_json(r#"{"world": {"widht": 3}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"episode": {"rewards": {"goal": 1.0, "extra": 0}}}"#).is_err());
    }

    #[test]
    fn partial_sections_keep_run_defaults() {
        let cfg = RunConfig::from_json(r#"{"episode": {"obstacles": {"count": [0, 0]}}}"#).unwrap();
        assert_eq!(cfg.episode.obstacles.count, [0, 0]);
        assert_eq!(cfg.episode.obstacles.speed, [0.1, 0.5]);
        assert_eq!(cfg.episode.phase, EpisodeConfig::eval().phase);
        assert_eq!(cfg.episode.waypoint_mode, EpisodeConfig::eval().waypoint_mode);
        let cfg = RunConfig::from_json(r#"{"episode": {"waypoint_mode": {"kind": "lookahead"}}}"#).unwrap();
        assert_eq!(cfg.episode.waypoint_mode, crate::episode::WaypointMode::Lookahead);
    }

    #[test]
    fn schema_version_is_checked() {
        let e = RunConfig::from_json(r#"{"schema_version": 2}"#).unwrap_err();
        assert_eq!(e.code, 2);
    }

    #[test]
    fn presets_resolve() {
        let w = WorldConfig { catalog: "preset:terraces".into(), ..WorldConfig::default() };
        assert!(w.load_catalog(Path::new(".")).is_ok());
        let w = WorldConfig { catalog: "preset:nope".into(), ..WorldConfig::default() };
        assert_eq!(w.load_catalog(Path::new(".")).unwrap_err().code, 2);
    }
}
